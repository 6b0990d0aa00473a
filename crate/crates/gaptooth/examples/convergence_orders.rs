// Observed convergence order of the slowest decaying pair under macro
// refinement, for fourth- and sixth-order coupling.
use gaptooth::coupling::GapToothConfig;
use gaptooth::microsim::{PdeChoice, ToothGeometry};
use gaptooth::spectra::convergence_study;
use gaptooth::stencil::{TbcFamily, TbcSpec};

fn main() -> gaptooth::Result<()> {
    for order in [4usize, 6] {
        let base = GapToothConfig {
            geom: ToothGeometry::new(16, 11, 0.1)?,
            pde: PdeChoice::Diffusion,
            tbc: TbcSpec {
                family: TbcFamily::Dirichlet,
                order,
            },
            dt: None,
            t_end: 1.0,
            initial_condition: Vec::new(),
        };
        let study = convergence_study(&base, &[8, 16, 32])?;
        println!("interpolation order {order}:");
        for row in &study.rows {
            let err = row.errors[0].map_or_else(|| "n/a".into(), |e| format!("{e:.3e}"));
            let obs =
                row.observed_orders[0].map_or_else(|| String::from("  --"), |o| format!("{o:4.2}"));
            println!(
                "  m = {:>2}   pair23 = {:9.6}   error vs -1 = {err}   observed order {obs}",
                row.m,
                row.groups.pair23.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
