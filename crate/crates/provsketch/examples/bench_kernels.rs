//! Measure kernel cost growth across neighborhood depths.
//!
//! The practical question when picking `h` is how the label space and the
//! runtime grow. The set-based `prov` kernel keeps one label per (node,
//! depth) and updates only what an insertion invalidates, so time per
//! depth is roughly linear in touched neighborhoods; the WL variants pay
//! for sorting neighbor lists. This example runs all three kernels over
//! the same random audit stream at several depths and prints the measured
//! histogram sizes and runtimes as CSV (the same table `provsketch bench`
//! emits).
//!
//! Numbers are wall-clock and machine-dependent; the shape of the curve,
//! not the absolute values, is the point.
//!
//! Run with: `cargo run --release --example bench_kernels`

use provsketch::kernel::KernelKind;
use provsketch::pipeline::{bench_csv, bench_kernels};
use provsketch::synth::bench_events;
use provsketch::vocab::Vocab;

fn main() {
    let events_n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000usize);
    let mut vocab = Vocab::new();
    let events = bench_events(42, events_n, &mut vocab);
    println!(
        "benchmarking {} events over {} entity types / {} event types\n",
        events.len(),
        vocab.entity_count(),
        vocab.event_count()
    );

    let rows = bench_kernels(&KernelKind::ALL, 0..=4, &events);
    print!("{}", bench_csv(&rows));

    // A quick readout of the scaling story per kernel.
    println!();
    for kind in KernelKind::ALL {
        let mine: Vec<_> = rows.iter().filter(|r| r.kernel == kind).collect();
        let first = mine.first().unwrap();
        let last = mine.last().unwrap();
        println!(
            "{:<8} histogram bins grew {} -> {} from h={} to h={}; runtime {:.1}ms -> {:.1}ms",
            kind.as_str(),
            first.avg_histogram_size,
            last.avg_histogram_size,
            first.h,
            last.h,
            first.runtime_ns as f64 / 1e6,
            last.runtime_ns as f64 / 1e6,
        );
    }
}
