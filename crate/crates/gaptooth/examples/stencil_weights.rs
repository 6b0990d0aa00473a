// Macro-grid stencils used by the tooth boundary conditions: weights of
// the interpolated edge value and of H times the edge derivative, for
// the right edge at offset fraction r from the nearest tooth centre.
use gaptooth::stencil::{deriv_weights, interp_weights, Side};

fn main() -> gaptooth::Result<()> {
    let r = 0.1;
    for order in [2usize, 4, 6, 8] {
        let p = order / 2;
        let value = interp_weights(r, p, Side::Right)?;
        let slope = deriv_weights(r, p, Side::Right)?;
        println!("order {order}, r = {r}:");
        for ((offset, v), (_, s)) in value.iter().zip(slope.iter()) {
            println!("  U[j{offset:+}]   value {v:+.12}   H d/dx {s:+.12}");
        }
        let value_sum: f64 = value.iter().map(|(_, w)| w).sum();
        let slope_sum: f64 = slope.iter().map(|(_, w)| w).sum();
        println!("  sums: value {value_sum:+.3e} (should be 1), derivative {slope_sum:+.3e} (should be 0)");
    }
    Ok(())
}
