use crispec_core::budget::Budgets;
use crispec_core::generate::{generate, GeneratorSpec};
use crispec_core::spectrum::{compute_spectrum, Flag};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    let b = Budgets::default();
    match which.as_str() {
        "circle" => {
            let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 200 }).unwrap();
            let t = Instant::now();
            let r = compute_spectrum(&s, &b);
            println!("circle200: {:?} cands={} cvs={:?} unknown={} ok={} time={:?}",
                r.values_with(Flag::Homotopy), r.candidates.len(),
                r.critical_values.iter().map(|c| (c.value, format!("{:?}", c.flags))).collect::<Vec<_>>(),
                r.unknown_count, r.consistency.all_ok(), t.elapsed());
        }
        "gap" => {
            let s = generate(&GeneratorSpec::CircleWithGap { circumference: 1.0, gap_fraction: 0.25, n: 200 }).unwrap();
            let t = Instant::now();
            let r = compute_spectrum(&s, &b);
            println!("gap200: h={:?} r={:?} unknown={} ok={} time={:?}",
                r.values_with(Flag::Homotopy), r.values_with(Flag::Refinement),
                r.unknown_count, r.consistency.all_ok(), t.elapsed());
        }
        "square" => {
            let s = generate(&GeneratorSpec::SquareBoundary { side: 1.0, mesh: 0.01 }).unwrap();
            println!("square n={}", s.n());
            let t = Instant::now();
            let r = compute_spectrum(&s, &b);
            println!("square: h={:?} r={:?} unknown={} ok={} time={:?}",
                r.values_with(Flag::Homotopy), r.values_with(Flag::Refinement),
                r.unknown_count, r.consistency.all_ok(), t.elapsed());
        }
        "comb" => {
            let s = generate(&GeneratorSpec::RapunzelCombV0 { teeth: 6, mesh: 1.0/32.0 }).unwrap();
            println!("comb n={}", s.n());
            let t = Instant::now();
            let r = compute_spectrum(&s, &b);
            println!("comb: h={:?} r={:?} unknown={} ok={} time={:?}",
                r.values_with(Flag::Homotopy), r.values_with(Flag::Refinement),
                r.unknown_count, r.consistency.all_ok(), t.elapsed());
            for cv in &r.critical_values {
                println!("  cv {} {:?} notes={:?}", cv.value, cv.flags, cv.witness.notes);
            }
        }
        _ => eprintln!("usage: smoke circle|gap|square|comb"),
    }
}
