//! Search and rewrite budgets shared across the decision procedures.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Budgets {
    /// Node budget for the bounded chain-move searches.
    pub search_nodes: usize,
    /// Extra points a search may insert beyond the start chain length.
    pub search_slack: usize,
    /// Vertex budget for cover balls; 0 means `10 * n`.
    pub cover_vertices: usize,
    /// Rewrite budget for presentation simplification.
    pub rewrite_steps: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            search_nodes: 200_000,
            search_slack: 2,
            cover_vertices: 0,
            rewrite_steps: 2_000_000,
        }
    }
}

impl Budgets {
    pub fn cover_budget(&self, n: usize) -> usize {
        if self.cover_vertices == 0 {
            10 * n
        } else {
            self.cover_vertices
        }
    }
}

/// What ran out when a verdict is `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub stage: String,
    pub spent: usize,
    pub limit: usize,
}
