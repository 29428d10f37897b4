//! Fixed Gauss–Legendre and adaptive Gauss–Kronrod rules on finite intervals.

/// 8-point Gauss–Legendre nodes and weights on [-1, 1].
pub const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (-0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
];

// Kronrod abscissae (positive half, descending) and weights; every odd entry
// is also a 7-point Gauss node.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_47,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integrates `f` over `[a, b]` with the 8-point Gauss–Legendre rule.
pub fn gauss_legendre_8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS_LEGENDRE_8
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Kronrod value, `|K - G|` error estimate and the roundoff floor of that
/// estimate (a small multiple of `ε ∫|f|`).
fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let centre = f(mid);
    let mut kronrod = GK_WEIGHTS[7] * centre;
    let mut gauss = GAUSS7_WEIGHTS[3] * centre;
    let mut absolute = GK_WEIGHTS[7] * centre.abs();
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        let pair = lo + hi;
        kronrod += GK_WEIGHTS[i] * pair;
        absolute += GK_WEIGHTS[i] * (lo.abs() + hi.abs());
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * pair;
        }
    }
    let half = half.abs();
    (kronrod * half * (b - a).signum(), ((kronrod - gauss) * half).abs(), 50.0 * f64::EPSILON * absolute * half)
}

/// Failure of [`adaptive_gauss_kronrod`] to meet its tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFailure {
    pub estimate: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol * |integral|)`. Stops early, with
/// success, once the worst interval's estimate is at roundoff level, since
/// bisecting further cannot lower it.
pub fn adaptive_gauss_kronrod(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64, QuadratureFailure> {
    let (v, e, floor) = gauss_kronrod_15(&f, a, b);
    let mut intervals = vec![(a, b, v, e, floor)];
    loop {
        let total: f64 = intervals.iter().map(|s| s.2).sum();
        let error: f64 = intervals.iter().map(|s| s.3).sum();
        if error <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if intervals[worst].3 <= intervals[worst].4 {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(QuadratureFailure {
                estimate: total,
                error,
            });
        }
        let (lo, hi, ..) = intervals.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        let (v1, e1, f1) = gauss_kronrod_15(&f, lo, m);
        let (v2, e2, f2) = gauss_kronrod_15(&f, m, hi);
        intervals.push((lo, m, v1, e1, f1));
        intervals.push((m, hi, v2, e2, f2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_15() {
        let v = gauss_legendre_8(|x| x.powi(15) + 3.0 * x.powi(14), 0.0, 2.0);
        let want = 2f64.powi(16) / 16.0 + 3.0 * 2f64.powi(15) / 15.0;
        assert!(((v - want) / want).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = adaptive_gauss_kronrod(|x| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12, 2000).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn adaptive_stops_at_roundoff() {
        // tolerance far below what double precision can certify
        let v = adaptive_gauss_kronrod(|x| x.powf(1.3) * 1e8, 0.0, 1e-6, 0.0, 1e-18, 50).unwrap();
        let want = 1e8 * 1e-6f64.powf(2.3) / 2.3;
        assert!(((v - want) / want).abs() < 1e-13, "{v} {want}");
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive_gauss_kronrod(|x| 1.0 / x, 0.0, 1.0, 1e-14, 0.0, 20);
        assert!(r.is_err());
    }
}
