//! Verner's 6(5) embedded pair with step-size control relative to the state.

const C: [f64; 9] = [
    0.0,
    0.06,
    0.095_933_333_333_333_33,
    0.1439,
    0.4973,
    0.9725,
    0.9995,
    1.0,
    1.0,
];

const A: [[f64; 8]; 9] = [
    [0.0; 8],
    [0.06, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        1.923_996_296_296_296_2e-2,
        7.669_337_037_037_037e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [0.035975, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        1.318_683_415_233_148_4,
        0.0,
        -5.042_058_063_628_562,
        4.220_674_648_395_414,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -41.872_591_664_327_516,
        0.0,
        159.432_562_163_137_5,
        -122.119_213_565_010_03,
        5.531_743_066_200_054,
        0.0,
        0.0,
        0.0,
    ],
    [
        -54.430_156_935_316_504,
        0.0,
        207.067_251_365_018_48,
        -158.610_813_784_59,
        6.991_816_585_950_242,
        -1.859_723_106_220_323_4e-2,
        0.0,
        0.0,
    ],
    [
        -54.663_741_787_281_98,
        0.0,
        207.952_806_255_389_36,
        -159.288_957_474_499_5,
        7.018_743_740_796_944,
        -1.833_878_590_504_572_2e-2,
        -5.119_484_997_882_099e-4,
        0.0,
    ],
    [
        3.438_957_868_357_036e-2,
        0.0,
        0.0,
        0.258_262_455_563_350_3,
        0.420_937_118_967_353_7,
        4.405_396_469_669_31,
        -176.483_119_024_298_65,
        172.364_133_401_415_07,
    ],
];

// Sixth-order weights are the last row of A (first same as last).
const B5: [f64; 9] = [
    4.909_967_648_382_49e-2,
    0.0,
    0.0,
    0.225_111_222_951_652_42,
    0.469_468_225_302_956_2,
    0.806_579_224_998_886_8,
    0.0,
    -0.607_119_489_177_796,
    5.686_113_944_047_569_6e-2,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum DriveError<E> {
    Eval(E),
    StepUnderflow { t: f64, h: f64 },
    TooManySteps { t: f64 },
    NonFinite { t: f64 },
    Halted { t: f64 },
}

/// An accepted step from `(t0, y0)` to `(t1, y1)` with the slopes at both ends.
pub(crate) struct Step<'a, const N: usize> {
    pub t0: f64,
    pub y0: &'a [f64; N],
    pub f0: &'a [f64; N],
    pub t1: f64,
    pub y1: &'a [f64; N],
    pub f1: &'a [f64; N],
    /// Index into `stops` when the step ends on one.
    pub stop: Option<usize>,
}

fn inf_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Attempt<const N: usize> {
    y: [f64; N],
    f_end: [f64; N],
    err: f64,
}

fn attempt<const N: usize, E>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
    rel_tol: f64,
    floor: f64,
) -> Result<Attempt<N>, E> {
    let mut k = [[0.0; N]; 9];
    k[0] = *f0;
    let mut stage = [0.0; N];
    for i in 1..9 {
        for (n, s) in stage.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(i) {
                acc += A[i][j] * kj[n];
            }
            *s = y[n] + h * acc;
        }
        k[i] = f(t + C[i] * h, &stage)?;
    }
    // The input of the last stage is the sixth-order solution.
    let y6 = stage;
    let mut err = [0.0; N];
    for (n, e) in err.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, kj) in k.iter().enumerate() {
            let b6 = if j < 8 { A[8][j] } else { 0.0 };
            acc += (b6 - B5[j]) * kj[n];
        }
        *e = h * acc;
    }
    let scale = rel_tol * inf_norm(y).max(inf_norm(&y6)).max(floor) + f64::MIN_POSITIVE;
    Ok(Attempt {
        y: y6,
        f_end: k[8],
        err: inf_norm(&err) / scale,
    })
}

fn initial_step<const N: usize>(t0: f64, t1: f64, y0: &[f64; N], f0: &[f64; N]) -> f64 {
    let span = (t1 - t0).abs();
    let d0 = inf_norm(y0);
    let d1 = inf_norm(f0);
    let mut h = if d0 > 1e-300 && d1 > 1e-300 {
        0.01 * d0 / d1
    } else {
        1e-3 * span
    };
    // The origin is a singular point; stay well inside |t0|.
    if t0 != 0.0 {
        h = h.min(0.01 * t0.abs());
    }
    h.min(span).max(span * 1e-12)
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`, landing exactly on every entry
/// of `stops` (which must be ordered in the direction of integration and lie
/// in `(t0, t1]`). `visit` sees every accepted step and may halt the run by
/// returning `false`. Errors are measured relative to the state norm, or to
/// `floor` when the state is smaller.
#[allow(clippy::too_many_arguments)]
pub(crate) fn drive<const N: usize, E>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    rel_tol: f64,
    floor: f64,
    stops: &[f64],
    mut visit: impl FnMut(&Step<'_, N>) -> bool,
) -> Result<StepStats, DriveError<E>> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(t, &y).map_err(DriveError::Eval)?;
    stats.evaluations += 1;
    let mut h = initial_step(t0, t1, &y, &fy);
    let mut next_stop = 0;

    while next_stop < stops.len() {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(DriveError::TooManySteps { t });
        }
        if h < 1e-15 * t.abs().max(f64::MIN_POSITIVE) {
            return Err(DriveError::StepUnderflow { t, h: dir * h });
        }
        let target = stops[next_stop];
        let remaining = (target - t) * dir;
        let lands = h >= remaining * (1.0 - 1e-12);
        let h_try = if lands { remaining } else { h };
        let a =
            attempt(&mut f, t, &y, &fy, dir * h_try, rel_tol, floor).map_err(DriveError::Eval)?;
        stats.evaluations += 8;
        if !a.err.is_finite() || a.y.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h *= MIN_FACTOR;
            if h < 1e-15 * t.abs() {
                return Err(DriveError::NonFinite { t });
            }
            continue;
        }
        let factor = if a.err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * a.err.powf(-1.0 / 6.0)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if a.err > 1.0 {
            stats.rejected += 1;
            h = h_try * factor;
            continue;
        }
        stats.accepted += 1;
        let t_new = if lands { target } else { t + dir * h_try };
        let step = Step {
            t0: t,
            y0: &y,
            f0: &fy,
            t1: t_new,
            y1: &a.y,
            f1: &a.f_end,
            stop: lands.then_some(next_stop),
        };
        if !visit(&step) {
            return Err(DriveError::Halted { t: t_new });
        }
        if lands {
            next_stop += 1;
            // A short landing step says nothing about the natural step size.
            h = h.max(h_try * factor);
        } else {
            h = h_try * factor;
        }
        t = t_new;
        y = a.y;
        fy = a.f_end;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        for i in 1..9 {
            let row: f64 = A[i].iter().sum();
            assert!((row - C[i]).abs() < 1e-13, "row {i}: {row} vs {}", C[i]);
        }
        let b6: f64 = A[8].iter().sum();
        let b5: f64 = B5.iter().sum();
        assert!((b6 - 1.0).abs() < 1e-13 && (b5 - 1.0).abs() < 1e-13);
        // sum b c^q = 1/(q+1) up to the order of each formula
        for q in 1..6 {
            let s6: f64 = (0..8).map(|j| A[8][j] * C[j].powi(q)).sum();
            assert!((s6 - 1.0 / (q as f64 + 1.0)).abs() < 1e-12, "q={q}");
        }
        for q in 1..5 {
            let s5: f64 = (0..9).map(|j| B5[j] * C[j].powi(q)).sum();
            assert!((s5 - 1.0 / (q as f64 + 1.0)).abs() < 1e-12, "q={q}");
        }
    }

    fn run_exp(rel_tol: f64) -> (f64, StepStats) {
        let mut end = 0.0;
        let stats = drive::<1, ()>(
            |_, y| Ok([y[0]]),
            0.0,
            5.0,
            [1.0],
            rel_tol,
            0.0,
            &[5.0],
            |s| {
                end = s.y1[0];
                true
            },
        )
        .unwrap();
        (end, stats)
    }

    #[test]
    fn exponential_growth() {
        let (y, stats) = run_exp(1e-10);
        assert!((y / 5f64.exp() - 1.0).abs() < 1e-9, "{y}");
        assert!(stats.accepted > 5 && stats.accepted < 200);
        let (_, loose) = run_exp(1e-6);
        assert!(loose.accepted < stats.accepted);
    }

    #[test]
    fn backward_and_stops() {
        let mut hits = Vec::new();
        drive::<1, ()>(
            |t, _| Ok([2.0 * t]),
            3.0,
            1.0,
            [9.0],
            1e-12,
            0.0,
            &[2.5, 2.0, 1.0],
            |s| {
                if s.stop.is_some() {
                    hits.push((s.t1, s.y1[0]));
                }
                true
            },
        )
        .unwrap();
        assert_eq!(hits.len(), 3);
        for (t, y) in hits {
            assert!((y - t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn halting_and_eval_errors() {
        let r = drive::<1, &str>(
            |_, y| Ok([y[0]]),
            0.0,
            10.0,
            [1.0],
            1e-8,
            0.0,
            &[10.0],
            |s| s.y1[0] < 100.0,
        );
        assert!(matches!(r, Err(DriveError::Halted { t }) if t < 5.0));
        let r = drive::<1, &str>(
            |t, y| if t > 1.0 { Err("boom") } else { Ok([y[0]]) },
            0.0,
            2.0,
            [1.0],
            1e-8,
            0.0,
            &[2.0],
            |_| true,
        );
        assert!(matches!(r, Err(DriveError::Eval("boom"))));
    }

    #[test]
    fn finite_time_blow_up_underflows() {
        // y' = y^2 blows up at t = 1.
        let r = drive::<1, ()>(
            |_, y| Ok([y[0] * y[0]]),
            0.0,
            2.0,
            [1.0],
            1e-10,
            0.0,
            &[2.0],
            |_| true,
        );
        assert!(matches!(
            r,
            Err(DriveError::StepUnderflow { .. } | DriveError::NonFinite { .. })
        ));
    }
}
