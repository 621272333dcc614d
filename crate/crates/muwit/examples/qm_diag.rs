use muwit::channels::*;
use muwit::witness::*;
use std::time::Instant;

fn main() {
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    let which = std::env::args().nth(1).unwrap_or_else(|| "hmr".into());
    let ch = match which.as_str() {
        "hmr" => hmr_benchmark(),
        "mu" => random_mu_channel(3, 5, 42).unwrap().0,
        "id" => identity_channel(3).unwrap(),
        "dep" => depolarizing(3).unwrap(),
        _ => landau_streater(),
    };
    let mut settings = WitnessSettings::default();
    if let Ok(v) = std::env::var("MUWIT_RHO") {
        settings.sdp.rho0 = v.parse().unwrap();
    }
    if let Ok(v) = std::env::var("MUWIT_ALPHA") {
        settings.sdp.relax_alpha = v.parse().unwrap();
    }
    if let Ok(v) = std::env::var("MUWIT_AA") {
        settings.sdp.aa_depth = v.parse().unwrap();
    }
    let choi = to_choi(&ch);
    let t0 = Instant::now();
    let r = s_qm(&choi, &settings).unwrap();
    println!(
        "value {:+.6e} status {:?} iters {} [{:.2}s]",
        r.value,
        r.status,
        r.stats.iterations,
        t0.elapsed().as_secs_f64()
    );
}
