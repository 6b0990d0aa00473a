// Growth rates of the linearised gap-tooth map, grouped by wavenumber,
// for a sweep of tooth counts.  The paired modes should approach the
// continuum decay rates -1, -4 and -9 as teeth are added.
use gaptooth::coupling::GapToothConfig;
use gaptooth::microsim::{PdeChoice, ToothGeometry};
use gaptooth::spectra::{exact_rate, spectrum};
use gaptooth::stencil::{TbcFamily, TbcSpec};

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "       n/a".to_string(), |v| format!("{v:>10.6}"))
}

fn main() -> gaptooth::Result<()> {
    let base = GapToothConfig {
        geom: ToothGeometry::new(16, 11, 0.1)?,
        pde: PdeChoice::Diffusion,
        tbc: TbcSpec {
            family: TbcFamily::Dirichlet,
            order: 4,
        },
        dt: None,
        t_end: 1.0,
        initial_condition: Vec::new(),
    };
    println!("teeth      mode1      pair23      pair45      pair67    internal");
    for m in [4usize, 8, 16, 32] {
        let config = base.with_teeth(m)?;
        let report = spectrum(&config)?;
        let groups = report.groups;
        println!(
            "{m:>5}  {:+9.2e}  {}  {}  {}  {:>10.1}",
            groups.mode1,
            cell(groups.pair23),
            cell(groups.pair45),
            cell(groups.pair67),
            groups.leading_internal
        );
    }
    println!(
        "exact             {:>10.6}  {:>10.6}  {:>10.6}",
        exact_rate(&base, 1),
        exact_rate(&base, 2),
        exact_rate(&base, 3)
    );
    Ok(())
}
