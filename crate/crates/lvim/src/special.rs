//! Normal CDF and quantile.
//!
//! Both functions are fixed rational approximations rather than bindings to
//! platform libm so that simulated draws and p-values are reproducible across
//! machines. `normal_cdf` follows Hart's algorithm as popularized by West
//! (double precision, absolute error below 1e-15); `normal_quantile` is
//! Wichura's PPND16 (AS 241). Frozen reference values are pinned in tests.

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let z = x.abs();
    if z > 37.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let e = (-z * z / 2.0).exp();
    let cum = if z < 7.071_067_811_865_475 {
        let mut num = 3.526_249_659_989_11e-2;
        num = num * z + 0.700_383_064_443_688;
        num = num * z + 6.373_962_203_531_65;
        num = num * z + 33.912_866_078_383;
        num = num * z + 112.079_291_497_871;
        num = num * z + 221.213_596_169_931;
        num = num * z + 220.206_867_912_376;
        let mut den = 8.838_834_764_831_84e-2;
        den = den * z + 1.755_667_163_182_64;
        den = den * z + 16.064_177_579_207;
        den = den * z + 86.780_732_202_946_1;
        den = den * z + 296.564_248_779_674;
        den = den * z + 637.333_633_378_831;
        den = den * z + 793.826_512_519_948;
        den = den * z + 440.413_735_824_752;
        num * e / den
    } else {
        let build = z + 0.65;
        let build = z + 4.0 / build;
        let build = z + 3.0 / build;
        let build = z + 2.0 / build;
        let build = z + 1.0 / build;
        e / build / 2.506_628_274_631_000_5
    };
    if x > 0.0 {
        1.0 - cum
    } else {
        cum
    }
}

/// Standard normal quantile function (inverse CDF).
///
/// Accepts p in the open interval (0, 1); returns +/- infinity at the closed
/// endpoints and NaN outside [0, 1].
// Coefficients are quoted verbatim from the published rational
// approximations, beyond f64 precision.
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let mut num = 2.5090809287301226727e3;
        num = num * r + 3.3430575583588128105e4;
        num = num * r + 6.7265770927008700853e4;
        num = num * r + 4.5921953931549871457e4;
        num = num * r + 1.3731693765509461125e4;
        num = num * r + 1.9715909503065514427e3;
        num = num * r + 1.3314166789178437745e2;
        num = num * r + 3.3871328727963666080;
        let mut den = 5.2264952788528545610e3;
        den = den * r + 2.8729085735721942674e4;
        den = den * r + 3.9307895800092710610e4;
        den = den * r + 2.1213794301586595867e4;
        den = den * r + 5.3941960214247511077e3;
        den = den * r + 6.8718700749205790830e2;
        den = den * r + 4.2313330701600911252e1;
        den = den * r + 1.0;
        return q * num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        let mut num = 7.74545014278341407640e-4;
        num = num * r + 2.27238449892691845833e-2;
        num = num * r + 2.41780725177450611770e-1;
        num = num * r + 1.27045825245236838258;
        num = num * r + 3.64784832476320460504;
        num = num * r + 5.76949722146069140550;
        num = num * r + 4.63033784615654529590;
        num = num * r + 1.42343711074968357734;
        let mut den = 1.05075007164441684324e-9;
        den = den * r + 5.47593808499534494600e-4;
        den = den * r + 1.51986665636164571966e-2;
        den = den * r + 1.48103976427480074590e-1;
        den = den * r + 6.89767334985100004550e-1;
        den = den * r + 1.67638483018380384940;
        den = den * r + 2.05319162663775882187;
        den = den * r + 1.0;
        num / den
    } else {
        let r = r - 5.0;
        let mut num = 2.01033439929228813265e-7;
        num = num * r + 2.71155556874348757815e-5;
        num = num * r + 1.24266094738807843860e-3;
        num = num * r + 2.65321895265761230930e-2;
        num = num * r + 2.96560571828504891230e-1;
        num = num * r + 1.78482653991729133580;
        num = num * r + 5.46378491116411436990;
        num = num * r + 6.65790464350110377720;
        let mut den = 2.04426310338993978564e-15;
        den = den * r + 1.42151175831644588870e-7;
        den = den * r + 1.84631831751005468180e-5;
        den = den * r + 7.86869131145613259100e-4;
        den = den * r + 1.48753612908506148525e-2;
        den = den * r + 1.36929880922735805310e-1;
        den = den * r + 5.99832206555887937690e-1;
        den = den * r + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
