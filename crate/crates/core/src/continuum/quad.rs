//! Adaptive Gauss–Kronrod quadrature, sine/cosine integrals and exact tails
//! of trigonometric-over-power integrands.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Result, SpreadError};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// 15-point Kronrod estimate and |Kronrod − Gauss| on [a, b].
pub fn gauss_kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive bisection: the interval with the largest error estimate
/// is split until the total estimate drops below `tol` (absolute) or the
/// rounding floor of the integral.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    let (value, error) = gauss_kronrod15(f, a, b);
    let mut pieces = vec![(a, b, value, error)];
    let mut total = Quadrature { value, error };
    while pieces.len() < MAX_INTERVALS {
        if !total.value.is_finite() {
            break;
        }
        let floor = 50.0 * f64::EPSILON * pieces.iter().map(|p| p.2.abs()).sum::<f64>();
        if total.error <= tol.max(floor) {
            return Ok(total);
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].3.total_cmp(&pieces[j].3))
            .unwrap_or(0);
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod15(f, lo, mid);
        let (v2, e2) = gauss_kronrod15(f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
        total.value = pieces.iter().map(|p| p.2).sum();
        total.error = pieces.iter().map(|p| p.3).sum();
    }
    Err(SpreadError::Quadrature { estimate: total.error })
}

/// Integrates over [a, b] split into `panels` equal pieces, each adaptive.
pub fn integrate_panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, tol: f64) -> Result<Quadrature> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let share = tol / panels as f64;
    let mut total = Quadrature { value: 0.0, error: 0.0 };
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let q = integrate(f, lo, hi, share)?;
        total.value += q.value;
        total.error += q.error;
    }
    Ok(total)
}

/// (Si(x), Ci(x)) for x > 0.
pub fn sine_cosine_integrals(x: f64) -> (f64, f64) {
    const EULER: f64 = 0.577_215_664_901_532_9;
    const MAXIT: usize = 200;
    debug_assert!(x > 0.0);
    if x > 2.0 {
        // Continued fraction for E₁(ix) by the modified Lentz method.
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..=MAXIT {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < f64::EPSILON {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        (FRAC_PI_2 + h.im, -h.re)
    } else {
        let (mut sums, mut sumc) = (0.0, 0.0);
        let mut sum = 0.0;
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        for k in 1..=MAXIT {
            fact *= x / k as f64;
            let term = fact / k as f64;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < f64::EPSILON {
                break;
            }
            odd = !odd;
        }
        (sums, sumc + x.ln() + EULER)
    }
}

/// coef · trig(freq · l) / l^power, with trig = sin or cos.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub coef: f64,
    pub freq: f64,
    pub power: i32,
    pub sine: bool,
}

impl TrigTerm {
    pub fn cos(coef: f64, freq: f64, power: i32) -> Self {
        Self {
            coef,
            freq,
            power,
            sine: false,
        }
    }

    pub fn sin(coef: f64, freq: f64, power: i32) -> Self {
        Self {
            coef,
            freq,
            power,
            sine: true,
        }
    }

    pub fn eval(&self, l: f64) -> f64 {
        let trig = if self.sine {
            (self.freq * l).sin()
        } else {
            (self.freq * l).cos()
        };
        self.coef * trig / l.powi(self.power)
    }
}

/// Expands the product of two trigonometric sums with product-to-sum rules.
pub fn multiply(a: &[TrigTerm], b: &[TrigTerm]) -> Vec<TrigTerm> {
    let mut out = Vec::with_capacity(2 * a.len() * b.len());
    for x in a {
        for y in b {
            let c = 0.5 * x.coef * y.coef;
            let p = x.power + y.power;
            let (diff, sum) = (x.freq - y.freq, x.freq + y.freq);
            match (x.sine, y.sine) {
                (false, false) => {
                    out.push(TrigTerm::cos(c, diff, p));
                    out.push(TrigTerm::cos(c, sum, p));
                }
                (true, true) => {
                    out.push(TrigTerm::cos(c, diff, p));
                    out.push(TrigTerm::cos(-c, sum, p));
                }
                (true, false) => {
                    out.push(TrigTerm::sin(c, sum, p));
                    out.push(TrigTerm::sin(c, diff, p));
                }
                (false, true) => {
                    out.push(TrigTerm::sin(c, sum, p));
                    out.push(TrigTerm::sin(-c, diff, p));
                }
            }
        }
    }
    out.retain(|t| t.coef != 0.0 && !(t.sine && t.freq == 0.0));
    out
}

/// ∫_Λ^∞ Σ terms dl, evaluated exactly through Si/Ci and integration by parts.
pub fn tail_integral(terms: &[TrigTerm], lambda: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        if t.coef == 0.0 {
            continue;
        }
        if t.power < 1 {
            return Err(SpreadError::Domain(format!("tail term l^-{} does not decay", t.power)));
        }
        let n = t.power as usize;
        let kappa = t.freq.abs();
        let parity = if t.sine && t.freq < 0.0 { -1.0 } else { 1.0 };
        let value = if kappa == 0.0 {
            if t.sine {
                0.0
            } else if n == 1 {
                return Err(SpreadError::Domain("tail term 1/l diverges".into()));
            } else {
                lambda.powi(1 - n as i32) / (n - 1) as f64
            }
        } else {
            let x = kappa * lambda;
            let (si, ci) = sine_cosine_integrals(x);
            let (s, c) = x.sin_cos();
            let (mut cn, mut sn) = (-ci, FRAC_PI_2 - si);
            for k in 2..=n {
                let scale = 1.0 / ((k - 1) as f64 * lambda.powi(k as i32 - 1));
                let next_c = c * scale - kappa / (k - 1) as f64 * sn;
                let next_s = s * scale + kappa / (k - 1) as f64 * cn;
                cn = next_c;
                sn = next_s;
            }
            if t.sine {
                sn
            } else {
                cn
            }
        };
        total += t.coef * parity * value;
    }
    Ok(total)
}
