use stirap::adiabatic::OptimalityReport;
use stirap::dynamics::StateVector;
use stirap::transfer::TransferResult;

/// Six significant digits, switching to exponent form for very small or
/// very large magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-3..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn populations_line(label: &str, psi: &StateVector) -> String {
    format!(
        "{label}: n1 = {}  n2 = {}  n3 = {}",
        sig6(psi.c1.norm_sqr()),
        sig6(psi.c2.norm_sqr()),
        sig6(psi.c3.norm_sqr())
    )
}

pub fn transfer_lines(r: &TransferResult) -> Vec<String> {
    let mut out = vec![
        format!("method: {}", r.method),
        format!("n3 = {}", sig6(r.n3)),
        format!("epsilon = {}", sig6(r.epsilon)),
    ];
    if let Some(p) = r.phase {
        out.push(format!("phase = {} rad", sig6(p)));
    }
    if let Some(e) = r.exponent {
        out.push(format!("ln n3 = {}", sig6(e.total())));
        out.push(format!("  transient       = {}", sig6(e.transient)));
        out.push(format!("  first integral  = {}", sig6(e.first_integral)));
        out.push(format!("  second integral = {}", sig6(e.second_integral)));
    }
    for d in &r.diagnostics {
        out.push(format!("note: {d}"));
    }
    out
}

pub fn optimality_line(rep: &OptimalityReport) -> String {
    format!(
        "optimality ({:?} order): {} (residual {}, scale {})",
        rep.order,
        if rep.optimal { "optimal" } else { "not optimal" },
        sig6(rep.residual),
        sig6(rep.scale)
    )
    .to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.9129214877), "0.912921");
        assert_eq!(sig6(0.2512), "0.251200");
        assert_eq!(sig6(123.456789), "123.457");
        assert_eq!(sig6(-0.0123456789), "-0.0123457");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(0.0), "0");
    }
}
