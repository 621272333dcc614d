use muwit::channels::*;
use muwit::witness::*;
use std::time::Instant;

fn main() {
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    let args: Vec<String> = std::env::args().collect();
    let fam = args.get(1).map(|s| s.as_str()).unwrap_or("dls");
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(21);
    let (a, b) = match fam {
        "ils" => (identity_channel(3).unwrap(), landau_streater()),
        "hls" => (hmr_benchmark(), landau_streater()),
        "hao" => (hmr_benchmark(), arveson_ohno()),
        "iao" => (identity_channel(3).unwrap(), arveson_ohno()),
        "dhmr" => (depolarizing(3).unwrap(), hmr_benchmark()),
        _ => (depolarizing(3).unwrap(), landau_streater()),
    };
    let grid: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let t0 = Instant::now();
    let scan = scan_family(&a, &b, WitnessKind::Qm, &grid, true, &Default::default()).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let total_iters: usize = scan.points.iter().map(|p| p.result.stats.iterations).sum();
    println!(
        "family {fam}: {} pts in {dt:.1}s ({} iters total), failures {}",
        n, total_iters, scan.failures
    );
    for pt in &scan.points {
        println!(
            "  p={:.3}  value {:+.6e}  det {}  it {:>5}  gap {:.1e}",
            pt.p, pt.result.value, pt.result.detected as u8, pt.result.stats.iterations, pt.result.stats.gap
        );
    }
    println!("thresholds: {:?}", scan.thresholds);
    println!("detected: {:?}", scan.detected_intervals);
}
