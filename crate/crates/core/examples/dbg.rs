use lpp_lab::special::*;
use lpp_lab::kernels::*;
use lpp_lab::pfaffian::*;
use lpp_lab::dist::*;
fn main() {
    let p = AsympParams::new(0.3, 0.5).unwrap();
    let opts = NumericOpts::default();
    let s_grid: Vec<f64> = (0..13).map(|i| -5.0 + 10.0 * i as f64 / 12.0).collect();
    for &s in &s_grid {
        match cdf_limit_at(&p, s, HVariant::Standard, &opts) {
            Ok((f, e)) => println!("S={s:.3}: F={f:.8} (err {e:.1e})"),
            Err(e) => {
                println!("S={s:.3}: ERROR {e}");
                // drill down over the stencil
                for k in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
                    let t = s + 0.01 * k;
                    let conj = default_asymp_conj(&p, t);
                    let grid = make_grid_panels(t, 16.0, 12, 10).unwrap();
                    let kern = asymp_kernel(&p, AsympMode::Bar, conj).unwrap();
                    let r = fredholm_pf(&kern, &grid);
                    let b = asymp_borders(&p, conj, &grid, HVariant::Standard);
                    println!("  t={t:.4}: pf={:?} borders_ok={}", r.map(|v| (v*1e6).round()/1e6), b.is_ok());
                }
                break;
            }
        }
    }
}
