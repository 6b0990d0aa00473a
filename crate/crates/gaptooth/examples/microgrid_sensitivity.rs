// How much the macroscale growth rates care about the microscale grid:
// sweep the points per tooth and the tooth width fraction.  A useful
// tooth boundary condition leaves the macroscale rates nearly alone.
use gaptooth::coupling::GapToothConfig;
use gaptooth::microsim::{PdeChoice, ToothGeometry};
use gaptooth::spectra::{micro_resolution_study, spectrum};
use gaptooth::stencil::{TbcFamily, TbcSpec};

fn main() -> gaptooth::Result<()> {
    let base = GapToothConfig {
        geom: ToothGeometry::new(16, 11, 0.1)?,
        pde: PdeChoice::Diffusion,
        tbc: TbcSpec {
            family: TbcFamily::TwoPoint { beta: 1.0 },
            order: 4,
        },
        dt: None,
        t_end: 1.0,
        initial_condition: Vec::new(),
    };

    let study = micro_resolution_study(&base, &[11, 21, 41])?;
    println!("micro points per tooth (two-point coupling, sixteen teeth):");
    for row in &study.rows {
        println!(
            "  n = {:>2}   pair23 = {:.6}   pair45 = {:.6}   pair67 = {:.6}",
            row.n,
            row.groups.pair23.unwrap_or(f64::NAN),
            row.groups.pair45.unwrap_or(f64::NAN),
            row.groups.pair67.unwrap_or(f64::NAN)
        );
    }
    if let Some(drift) = study.max_rel_variation_pair23 {
        println!("  pair23 relative variation {drift:.2e}");
    }

    println!("tooth width fraction (Dirichlet coupling, sixteen teeth):");
    for ratio in [0.05, 0.1, 0.2] {
        let config = GapToothConfig {
            geom: ToothGeometry::new(16, 11, ratio)?,
            tbc: TbcSpec {
                family: TbcFamily::Dirichlet,
                order: 4,
            },
            ..base.clone()
        };
        let report = spectrum(&config)?;
        println!(
            "  r = {ratio:4.2}   pair23 = {:.6}",
            report.groups.pair23.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
