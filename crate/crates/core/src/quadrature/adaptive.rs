use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use libm::{fabs, pow};

use super::{double_exp, Outcome, Pair, QuadraturePlan};
use crate::Result;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059_5,
    0.865_063_366_688_984_510_732_096_688_423_5,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114_9,
    0.562_757_134_668_604_683_339_000_099_272_7,
    0.433_395_394_129_247_190_799_265_943_165_8,
    0.294_392_862_701_460_198_131_126_603_103_9,
    0.148_874_338_981_631_210_884_826_001_129_7,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_19,
    0.032_558_162_307_964_727_478_818_972_459_39,
    0.054_755_896_574_351_996_031_381_300_244_58,
    0.075_039_674_810_919_952_767_043_140_916_19,
    0.093_125_454_583_697_605_535_065_465_083_37,
    0.109_387_158_802_297_641_899_210_590_325_8,
    0.123_491_976_262_065_851_077_600_225_262_4,
    0.134_709_217_311_473_325_928_054_001_771_7,
    0.142_775_938_577_060_080_797_094_273_138_7,
    0.147_739_104_901_338_491_374_841_515_972_1,
    0.149_445_554_002_916_905_664_936_468_389_8,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_33,
    0.149_451_349_150_580_593_145_776_339_657_7,
    0.219_086_362_515_982_043_995_534_934_228_2,
    0.269_266_719_309_996_355_091_226_921_569_5,
    0.295_524_224_714_752_870_173_892_994_651_3,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    /// Integral of the attached error density.
    aux: f64,
}

impl Panel {
    fn total_err(&self) -> f64 {
        self.err + self.aux
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_err()
            .total_cmp(&other.total_err())
            .then_with(|| other.piece.cmp(&self.piece))
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<G>(g: &G, piece: usize, a: f64, b: f64) -> Result<Panel>
where
    G: Fn(usize, f64) -> Result<Pair>,
{
    let g = |x: f64| g(piece, x);
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0; 21];
    let mut av = [0.0; 21];
    (fv[10], av[10]) = g(center)?;
    for k in 0..10 {
        let dx = half * XGK[k];
        (fv[k], av[k]) = g(center - dx)?;
        (fv[20 - k], av[20 - k]) = g(center + dx)?;
    }

    let mut resk = WGK[10] * fv[10];
    let mut resg = 0.0;
    let mut resabs = WGK[10] * fabs(fv[10]);
    let mut aux = WGK[10] * av[10];
    for k in 0..10 {
        let pair = fv[k] + fv[20 - k];
        resk += WGK[k] * pair;
        resabs += WGK[k] * (fabs(fv[k]) + fabs(fv[20 - k]));
        aux += WGK[k] * (av[k] + av[20 - k]);
        if k % 2 == 1 {
            resg += WG[k / 2] * pair;
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * fabs(fv[10] - mean);
    for k in 0..10 {
        resasc += WGK[k] * (fabs(fv[k] - mean) + fabs(fv[20 - k] - mean));
    }

    let scale = fabs(half);
    let resabs = resabs * scale;
    let resasc = resasc * scale;
    let mut err = fabs((resk - resg) * half);
    if resasc != 0.0 && err != 0.0 {
        err = resasc * pow(200.0 * err / resasc, 1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        piece,
        a,
        b,
        value: resk * half,
        err,
        aux: aux * scale,
    })
}

fn can_bisect(p: &Panel) -> bool {
    let mid = 0.5 * (p.a + p.b);
    let width = p.b - p.a;
    p.a < mid && mid < p.b && width > 64.0 * f64::EPSILON * fabs(p.a).max(fabs(p.b)).max(f64::MIN_POSITIVE)
}

/// Globally adaptive bisection of the worst panel across all pieces. When the
/// worst panel is too narrow to split, the remaining budget goes to a
/// tanh-sinh pass and the better-estimated result is kept.
pub(super) fn integrate<G>(g: &G, pieces: &[(f64, f64)], plan: &QuadraturePlan) -> Result<Outcome>
where
    G: Fn(usize, f64) -> Result<Pair>,
{
    let mut heap = BinaryHeap::new();
    let mut n_evals = 0;
    let mut value = 0.0;
    let mut err = 0.0;
    for (i, &(a, b)) in pieces.iter().enumerate() {
        let p = gk21(g, i, a, b)?;
        n_evals += 21;
        value += p.value;
        err += p.total_err();
        heap.push(p);
    }
    let mut stalled = false;

    while err > plan.target(value) && n_evals + 42 <= plan.max_evals {
        let Some(worst) = heap.peek() else { break };
        if !can_bisect(worst) {
            stalled = true;
            break;
        }
        let worst = heap.pop().expect("peeked");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk21(g, worst.piece, worst.a, mid)?;
        let right = gk21(g, worst.piece, mid, worst.b)?;
        n_evals += 42;
        value += left.value + right.value - worst.value;
        err += left.total_err() + right.total_err() - worst.total_err();
        heap.push(left);
        heap.push(right);
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.piece.cmp(&q.piece).then(p.a.total_cmp(&q.a)));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let err: f64 = panels.iter().map(Panel::total_err).sum();
    let out = Outcome { value, err, n_evals };

    let remaining = plan.max_evals.saturating_sub(n_evals);
    if stalled && err > plan.target(value) && remaining >= 64 {
        let de = double_exp::integrate(g, pieces, plan, remaining)?;
        let n_evals = out.n_evals + de.n_evals;
        let best = if de.err < out.err { de } else { out };
        return Ok(Outcome { n_evals, ..best });
    }
    Ok(out)
}
