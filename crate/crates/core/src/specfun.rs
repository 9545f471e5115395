//! Scalar special functions.
//!
//! Macdonald functions `K_ν` are evaluated for integer and half-integer order
//! only; the order is carried as the integer `2ν` so that order comparisons are
//! exact. Integer orders start from `K_0`, `K_1` (power series for `z ≤ 2`,
//! Steed's continued fraction above) and recur upward, which is stable for `K`.
//! Half-integer orders are elementary.

use core::f64::consts::{FRAC_PI_2, PI};

use libm::{ceil, cos, exp, fabs, log, sin, sqrt};

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Below this argument `K_0`, `K_1` come from the power series.
const SERIES_CROSSOVER: f64 = 2.0;

/// `e^{-z}` is subnormal beyond this point.
const UNDERFLOW_ARG: f64 = 708.0;

/// Order `ν` of a Bessel-type function, stored as `2ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order {
    twice_nu: u32,
}

impl Order {
    pub const ZERO: Order = Order { twice_nu: 0 };
    pub const HALF: Order = Order { twice_nu: 1 };
    pub const ONE: Order = Order { twice_nu: 2 };
    pub const THREE_HALVES: Order = Order { twice_nu: 3 };
    pub const TWO: Order = Order { twice_nu: 4 };

    /// Order `ν = twice_nu / 2`. Negative orders fold onto positive ones
    /// (`K_{-ν} = K_ν`).
    pub const fn from_twice(twice_nu: i32) -> Self {
        Order {
            twice_nu: twice_nu.unsigned_abs(),
        }
    }

    pub const fn integer(n: i32) -> Self {
        Order::from_twice(2 * n)
    }

    /// `K_{M/2}`, the order of the `M`-orbital kernel.
    pub const fn half_of(m: u32) -> Self {
        Order { twice_nu: m }
    }

    pub const fn twice_nu(self) -> u32 {
        self.twice_nu
    }

    pub fn value(self) -> f64 {
        self.twice_nu as f64 / 2.0
    }

    pub const fn is_half_integer(self) -> bool {
        self.twice_nu % 2 == 1
    }

    /// The order `2ν`, i.e. the order of the `K` in `G^{2,0}_{0,2}(·|ν,-ν)`.
    pub const fn doubled(self) -> Self {
        Order {
            twice_nu: 2 * self.twice_nu,
        }
    }
}

/// `K_ν(z)` together with a flag raised when `e^{-z}` left the normal range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    pub underflow: bool,
}

fn check_arg(z: f64) -> Result<()> {
    if z > 0.0 && !z.is_nan() {
        Ok(())
    } else {
        Err(Error::domain("Bessel argument must be positive", z))
    }
}

/// `K_ν(z)`; returns 0 where `e^{-z}` underflows (see [`bessel_k_flagged`]).
pub fn bessel_k(nu: Order, z: f64) -> Result<f64> {
    bessel_k_flagged(nu, z).map(|k| k.value)
}

pub fn bessel_k_flagged(nu: Order, z: f64) -> Result<BesselK> {
    check_arg(z)?;
    if z > UNDERFLOW_ARG {
        let value = if z.is_finite() {
            bessel_k_scaled(nu, z)? * exp(-z)
        } else {
            0.0
        };
        return Ok(BesselK {
            value,
            underflow: true,
        });
    }
    Ok(BesselK {
        value: bessel_k_scaled(nu, z)? * exp(-z),
        underflow: false,
    })
}

/// `e^{z} K_ν(z)`, finite for every positive finite `z`.
pub fn bessel_k_scaled(nu: Order, z: f64) -> Result<f64> {
    check_arg(z)?;
    if !z.is_finite() {
        return Err(Error::domain("Bessel argument must be finite", z));
    }
    if nu.is_half_integer() {
        Ok(half_integer_scaled(nu.twice_nu, z))
    } else {
        Ok(integer_scaled(nu.twice_nu / 2, z))
    }
}

fn half_integer_scaled(twice_nu: u32, z: f64) -> f64 {
    let mut k_lo = sqrt(PI / (2.0 * z)); // K_{1/2}
    if twice_nu == 1 {
        return k_lo;
    }
    let mut k_hi = k_lo * (1.0 + 1.0 / z); // K_{3/2}
    let mut twice = 3;
    while twice < twice_nu {
        // K_{μ+1} = K_{μ-1} + (2μ/z) K_μ
        let next = k_lo + (twice as f64 / z) * k_hi;
        k_lo = k_hi;
        k_hi = next;
        twice += 2;
    }
    k_hi
}

fn integer_scaled(n: u32, z: f64) -> f64 {
    let (k0, k1) = if z <= SERIES_CROSSOVER {
        let (k0, k1) = k01_series(z);
        let ez = exp(z);
        (k0 * ez, k1 * ez)
    } else {
        k01_steed_scaled(z)
    };
    match n {
        0 => k0,
        1 => k1,
        _ => {
            let (mut lo, mut hi) = (k0, k1);
            for m in 1..n {
                let next = lo + (2.0 * m as f64 / z) * hi;
                lo = hi;
                hi = next;
            }
            hi
        }
    }
}

/// `K_0(z)` and `K_1(z)` by their ascending series with the explicit log term.
fn k01_series(z: f64) -> (f64, f64) {
    let y = 0.25 * z * z;
    let ln_half = log(0.5 * z);

    // t0_k = y^k/(k!)^2, t1_k = y^k/(k!(k+1)!)
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut psi_k = -EULER_GAMMA; // ψ(k+1)
    let mut psi_k1 = 1.0 - EULER_GAMMA; // ψ(k+2)

    let mut i0 = 0.0;
    let mut i1_reduced = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 0u32;
    loop {
        i0 += t0;
        i1_reduced += t1;
        s0 += psi_k * t0;
        s1 += (psi_k + psi_k1) * t1;
        k += 1;
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        psi_k += 1.0 / kf;
        psi_k1 += 1.0 / (kf + 1.0);
        if t0 < f64::EPSILON * 1e-2 * i0 || k > 200 {
            break;
        }
    }
    let k0 = -ln_half * i0 + s0;
    let i1 = 0.5 * z * i1_reduced;
    let k1 = 1.0 / z + ln_half * i1 - 0.25 * z * s1;
    (k0, k1)
}

/// Scaled `K_0`, `K_1` from Steed's evaluation of Temme's continued fraction.
fn k01_steed_scaled(z: f64) -> (f64, f64) {
    const MAX_ITER: u32 = 10_000;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if fabs(dels / s) < f64::EPSILON * 0.25 {
            break;
        }
    }
    h *= a1;
    let k0 = sqrt(PI / (2.0 * z)) / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

/// `U(ν+1/2, 2ν+1, z)` for `ν ∈ {0, 2}`, obtained by inverting
/// `K_ν(w) = √π (2w)^ν e^{-w} U(ν+1/2, 2ν+1, 2w)`.
pub fn tricomi_u_special(nu: Order, z: f64) -> Result<f64> {
    let power = match nu.twice_nu {
        0 => 1.0,
        4 => z * z,
        _ => {
            return Err(Error::NotImplemented(
                "Tricomi U is provided only for U(1/2,1,z) and U(5/2,5,z)",
            ))
        }
    };
    check_arg(z)?;
    Ok(bessel_k_scaled(nu, 0.5 * z)? / (SQRT_PI * power))
}

/// Physicists' Hermite polynomial `H_j(x)` by three-term recurrence.
/// Intended for `j ≤ 30`.
pub fn hermite(j: u32, x: f64) -> f64 {
    let mut h_prev = 1.0;
    if j == 0 {
        return h_prev;
    }
    let mut h = 2.0 * x;
    for n in 1..j {
        let next = 2.0 * x * h - 2.0 * n as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// `G^{2,0}_{0,2}(z | ν, -ν) = 2 K_{2ν}(2√z)`.
pub fn meijer_g2002(z: f64, nu: Order) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain("Meijer G argument must be positive", z));
    }
    Ok(2.0 * bessel_k(nu.doubled(), 2.0 * sqrt(z))?)
}

/// Bessel function of the first kind `J_0(x)`.
///
/// Trapezoidal rule on `(1/2π)∫cos(x sin θ)dθ` over a full period for
/// `|x| ≤ 25` (exponentially convergent, no cancellation), Hankel's
/// asymptotic expansion above.
pub fn bessel_j0(x: f64) -> f64 {
    let x = fabs(x);
    if x <= 25.0 {
        let n = 64usize.max(ceil(x) as usize + 40);
        let step = 2.0 * PI / n as f64;
        let sum: f64 = (0..n).map(|k| cos(x * sin(k as f64 * step))).sum();
        return sum / n as f64;
    }
    // P ~ Σ (-1)^k a_{2k}/x^{2k}, Q ~ Σ (-1)^k a_{2k+1}/x^{2k+1},
    // a_k = Π_{j≤k} (-(2j-1)^2) / (k! 8^k).
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 0u32;
    let mut last = f64::INFINITY;
    loop {
        let mag = fabs(term);
        if mag > last || mag < 1e-17 * (fabs(p) + 1.0) || k > 100 {
            break;
        }
        last = mag;
        match k % 4 {
            0 => p += term,
            1 => q -= term,
            2 => p -= term,
            _ => q += term,
        }
        k += 1;
        let odd = (2 * k - 1) as f64;
        term *= odd * odd / (k as f64 * 8.0 * x);
    }
    let phase = x - 0.5 * FRAC_PI_2;
    sqrt(2.0 / (PI * x)) * (p * cos(phase) - q * sin(phase))
}
