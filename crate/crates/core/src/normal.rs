//! Standard normal distribution functions.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{erfc, exp, log, sqrt};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn pdf(z: f64) -> f64 {
    exp(-0.5 * z * z) / sqrt(2.0 * PI)
}

/// Φ(z).
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// 1 − Φ(z), accurate in the upper tail.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// ln Φ(z), finite for every finite `z`.
pub fn ln_cdf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if z > -35.0 {
        return log(cdf(z));
    }
    // Asymptotic expansion of the Mills ratio.
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - log(-z) - LN_SQRT_2PI + log(series)
}

/// ln(1 − Φ(z)).
pub fn ln_sf(z: f64) -> f64 {
    ln_cdf(-z)
}

/// ln(Φ(b) − Φ(a)) for a < b, evaluated on the side of zero where the
/// subtraction does not cancel.
pub fn ln_interval_prob(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if a == f64::NEG_INFINITY {
        return ln_cdf(b);
    }
    if b == f64::INFINITY {
        return ln_sf(a);
    }
    if a >= 0.0 {
        let (sa, sb) = (sf(a), sf(b));
        if sa > 0.0 {
            return log(sa - sb);
        }
        // Both tails underflow: ln Q(a) + ln(1 − Q(b)/Q(a)).
        let la = ln_sf(a);
        let lb = ln_sf(b);
        return la + libm::log1p(-exp(lb - la));
    }
    if b <= 0.0 {
        return ln_interval_prob(-b, -a);
    }
    log(1.0 - sf(b) - cdf(a))
}

/// Inverse of Φ (Wichura's AS 241, about 16 significant digits).
pub fn ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
                + 6.726_577_092_700_87e4)
                * r
                + 4.592_195_393_154_987e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_3e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    ppf_tail(tail, q < 0.0)
}

/// Inverse of the upper tail: returns z with 1 − Φ(z) = p. Keeps full
/// relative precision for tiny `p`.
pub fn isf(p: f64) -> f64 {
    if p < 0.075 {
        return ppf_tail(p, false);
    }
    -ppf(p)
}

// z with tail mass `p` (p <= 0.075); negative when `lower`.
fn ppf_tail(p: f64, lower: bool) -> f64 {
    if p <= 0.0 {
        return if lower {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    let mut r = sqrt(-log(p));
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_049e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0)
    };
    if lower {
        -val
    } else {
        val
    }
}
