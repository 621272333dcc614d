use muwit::qmat::CMatrix;
use std::time::Instant;

fn main() {
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    for n in [27usize, 45, 63, 81] {
        let a = {
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = muwit::qmat::C64::new(((i * 13 + j * 7) % 11) as f64 - 5.0, (i as f64 - j as f64) * 0.3);
                }
            }
            m.hermitize()
        };
        let reps = 200;
        let t0 = Instant::now();
        let mut s = 0.0;
        for _ in 0..reps {
            let e = a.eigh().unwrap();
            s += e.values[0];
        }
        let t_eig = t0.elapsed().as_secs_f64() / reps as f64;
        let t0 = Instant::now();
        for _ in 0..reps {
            let e = a.eigh().unwrap();
            let p = e.positive_part();
            s += p.max_abs();
        }
        let t_proj = t0.elapsed().as_secs_f64() / reps as f64;
        let t0 = Instant::now();
        for _ in 0..reps {
            let b = a.matmul(&a);
            s += b.max_abs();
        }
        let t_mm = t0.elapsed().as_secs_f64() / reps as f64;
        println!("n={n}: eigh {:.3} ms, eigh+pospart {:.3} ms, matmul {:.3} ms (s={s:.1})", t_eig * 1e3, t_proj * 1e3, t_mm * 1e3);
    }
}
