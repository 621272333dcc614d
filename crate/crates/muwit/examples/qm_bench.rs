use muwit::channels::*;
use muwit::witness::*;
use std::time::Instant;

fn run(name: &str, ch: &Channel) {
    let choi = to_choi(ch);
    let settings = WitnessSettings::default();
    let t0 = Instant::now();
    let r = s_qm(&choi, &settings).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "{name:>10}: value {:+.6e}  primal {:+.6e}  status {:?}  detected {}  iters {}  gap {:.2e}  eq_res {:.2e}  psd_min {:+.2e}  [{dt:.2}s]",
        r.value,
        r.stats.primal_value.unwrap_or(f64::NAN),
        r.status,
        r.detected,
        r.stats.iterations,
        r.stats.gap,
        r.stats.eq_residual,
        r.stats.psd_min_eig,
    );
}

fn main() {
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    run("identity", &identity_channel(3).unwrap());
    run("depol", &depolarizing(3).unwrap());
    run("ls", &landau_streater());
    run("ao", &arveson_ohno());
    run("hmr", &hmr_benchmark());
    let (mu, _) = random_mu_channel(3, 5, 42).unwrap();
    run("random_mu", &mu);
    let dls = mix_pair(&depolarizing(3).unwrap(), &landau_streater(), 0.3).unwrap();
    run("d-ls@0.3", &dls);
    let dls = mix_pair(&depolarizing(3).unwrap(), &landau_streater(), 0.6).unwrap();
    run("d-ls@0.6", &dls);
}
