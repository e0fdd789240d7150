//! Special functions: Γ, Gauss–Legendre rules, the scalar extension profile
//! φ_s, and a modified-Bessel reference evaluation used to cross-check it.

use crate::budgets;
use crate::error::{CoreError, Result};

/// Lanczos coefficients (g = 7, 9 terms), standard double-precision set.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) for real z (poles at non-positive integers return ±∞).
///
/// Lanczos approximation for z ≥ 1/2, reflection Γ(z)Γ(1−z) = π/sin(πz)
/// below. Accurate to ~1e-13 relative over the range used here.
pub fn gamma(z: f64) -> f64 {
    if z < 0.5 {
        // Reflection. sin(πz) via sin of the reduced argument for accuracy.
        std::f64::consts::PI / ((std::f64::consts::PI * z).sin() * gamma(1.0 - z))
    } else {
        let z = z - 1.0;
        let mut x = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * x
    }
}

/// Verifies the reflection identity Γ(−s) = −π / (sin(πs) Γ(1+s)) at `s`,
/// returning the relative defect. Used as a self-check of the implementation.
pub fn gamma_reflection_defect(s: f64) -> f64 {
    let lhs = gamma(-s);
    let rhs = -std::f64::consts::PI / ((std::f64::consts::PI * s).sin() * gamma(1.0 + s));
    ((lhs - rhs) / rhs).abs()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Roots of the Legendre polynomial by Newton iteration from the Chebyshev
/// initial guess; weights w = 2 / ((1-x²) P'ₙ(x)²). Deterministic, no tables.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "empty quadrature rule");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// The scalar profile of the degenerate extension for a single mode:
///
///   φ_s(ρ) = (1/Γ(s)) ∫₀^∞ σ^{s-1} exp(-σ - ρ²/(4σ)) dσ,
///
/// normalized so φ_s(0) = 1. The mode with eigenvalue λ extends in `y` as
/// φ_s(√λ·y). Equivalently φ_s(ρ) = 2^{1-s}/Γ(s) · ρ^s K_s(ρ), which is what
/// [`bessel_k_reference`] cross-checks.
///
/// Quadrature: the boundary singularity at σ→0 is removed by substituting
/// w = σ^s on [0,1]; the tail [1, max(ρ,1)+50] is integrated directly.
/// Composite Gauss–Legendre panels are doubled until two successive estimates
/// agree to [`budgets::PROFILE_QUAD_TOL`] relative.
pub fn extension_profile(s: f64, rho: f64) -> Result<f64> {
    assert!((0.0..1.0).contains(&s) && s > 0.0, "order out of range");
    assert!(rho >= 0.0, "profile argument must be nonnegative");
    if rho == 0.0 {
        return Ok(1.0);
    }
    // Below double-precision underflow of e^{-ρ} for any polynomial prefactor.
    if rho > 600.0 {
        return Ok(0.0);
    }
    let tol = budgets::PROFILE_QUAD_TOL;
    let upper = rho.max(1.0) + 50.0;
    let (gx, gw) = gauss_legendre(16);
    const OCTAVES: usize = 64;
    // Rule: Gauss–Legendre over each panel; `q` uniform sub-panels per
    // section. Refinement doubles q everywhere, so successive values give an
    // honest error estimate.
    let eval = |q: usize| -> f64 {
        let mut total = 0.0;
        let mut panel = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
            for i in 0..q {
                let pa = a + (b - a) * i as f64 / q as f64;
                let pb = a + (b - a) * (i + 1) as f64 / q as f64;
                let (mid, half) = (0.5 * (pa + pb), 0.5 * (pb - pa));
                let mut acc = 0.0;
                for (x, w) in gx.iter().zip(&gw) {
                    acc += w * f(mid + half * x);
                }
                total += half * acc;
            }
        };
        // Part 1: σ ∈ (0,1], substituted w = σ^s ⇒ σ^{s-1} dσ = (1/s) dw.
        // The factor e^{-ρ²/(4 w^{1/s})} switches on at w ≈ (ρ²/4)^s, which
        // can sit at any dyadic scale, so the sections are graded
        // geometrically toward w = 0 (one octave each, down to 2^-64).
        let part1 = |w: f64| {
            let sigma = w.powf(1.0 / s);
            ((-sigma - rho * rho / (4.0 * sigma.max(f64::MIN_POSITIVE))).exp()) / s
        };
        for k in 0..OCTAVES {
            let a = if k == 0 {
                0.0
            } else {
                0.5f64.powi((OCTAVES - k) as i32)
            };
            let b = 0.5f64.powi((OCTAVES - 1 - k) as i32);
            panel(a, b, &part1);
        }
        // Part 2: σ ∈ [1, upper], direct, in unit-width sections scaled by q.
        let part2 = |sigma: f64| sigma.powf(s - 1.0) * (-sigma - rho * rho / (4.0 * sigma)).exp();
        let sections = 16;
        for k in 0..sections {
            let a = 1.0 + (upper - 1.0) * k as f64 / sections as f64;
            let b = 1.0 + (upper - 1.0) * (k + 1) as f64 / sections as f64;
            panel(a, b, &part2);
        }
        total / gamma(s)
    };
    let mut q = 1;
    let mut prev = eval(q);
    loop {
        q *= 2;
        let cur = eval(q);
        let scale = cur.abs().max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= tol * scale || q >= 32 {
            if (cur - prev).abs() > tol * scale && cur.abs() > 1e-280 {
                return Err(CoreError::QuadratureTolerance {
                    tol,
                    err: (cur - prev).abs() / scale,
                    context: format!("extension profile s={s}, rho={rho}"),
                });
            }
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Reference evaluation of the modified Bessel function K_s(ρ) through the
/// integral representation K_s(ρ) = ∫₀^∞ e^{-ρ cosh t} cosh(st) dt,
/// truncated where the integrand falls below 1e-18. Independent of
/// [`extension_profile`]'s integral; used to cross-validate it.
pub fn bessel_k_reference(s: f64, rho: f64) -> f64 {
    assert!(rho > 0.0, "reference integral needs rho > 0");
    let integrand = |t: f64| (-rho * t.cosh()).exp() * (s * t).cosh();
    let mut upper = 1.0_f64;
    while integrand(upper) > 1e-18 && upper < 500.0 {
        upper *= 1.5;
    }
    let (gx, gw) = gauss_legendre(24);
    let eval = |npanels: usize| -> f64 {
        let mut total = 0.0;
        for k in 0..npanels {
            let a = upper * k as f64 / npanels as f64;
            let b = upper * (k + 1) as f64 / npanels as f64;
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut acc = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                acc += w * integrand(mid + half * x);
            }
            total += half * acc;
        }
        total
    };
    let mut npanels = 4;
    let mut prev = eval(npanels);
    loop {
        npanels *= 2;
        let cur = eval(npanels);
        if (cur - prev).abs() <= 1e-12 * cur.abs().max(f64::MIN_POSITIVE) || npanels >= 256 {
            return cur;
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Frozen high-precision references (30-digit arithmetic, 20 digits kept).
    const GAMMA_REFS: [(f64, f64); 10] = [
        (0.5, 1.7724538509055160273),
        (0.25, 3.6256099082219083119),
        (0.75, 1.2254167024651776451),
        (1.5, 0.88622692545275801365),
        (-0.25, -4.9016668098607105805),
        (-0.5, -3.5449077018110320546),
        (-0.75, -4.8341465442958777492),
        (-0.1, -10.686287021193193001),
        (-0.9, -10.570564109631926448),
        (3.7, 4.1706517837966040301),
    ];

    #[test]
    fn gamma_matches_frozen_references() {
        for (z, want) in GAMMA_REFS {
            assert_relative_eq!(gamma(z), want, max_relative = 5e-13);
        }
    }

    #[test]
    fn gamma_reflection_identity_holds() {
        for k in 1..=9 {
            let s = k as f64 / 10.0;
            assert!(
                gamma_reflection_defect(s) < budgets::GAMMA_REFLECTION,
                "reflection defect too large at s={s}: {}",
                gamma_reflection_defect(s)
            );
        }
    }

    #[test]
    fn gauss_legendre_matches_frozen_eight_point_rule() {
        let (x, w) = gauss_legendre(8);
        let refs = [
            (-0.96028985649753618, 0.10122853629037669),
            (-0.79666647741362673, 0.22238103445337434),
            (-0.52553240991632899, 0.31370664587788705),
            (-0.18343464249564978, 0.36268378337836177),
            (0.18343464249564978, 0.36268378337836177),
            (0.52553240991632899, 0.31370664587788705),
            (0.79666647741362673, 0.22238103445337434),
            (0.96028985649753618, 0.10122853629037669),
        ];
        for (i, (xr, wr)) in refs.iter().enumerate() {
            assert_relative_eq!(x[i], xr, max_relative = 1e-14);
            assert_relative_eq!(w[i], wr, max_relative = 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        // n-point rule integrates degree ≤ 2n-1 exactly: ∫_{-1}^{1} x^k dx.
        for n in [2usize, 5, 9, 16] {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!(
                    (quad - exact).abs() < 1e-13,
                    "n={n} k={k}: {quad} vs {exact}"
                );
            }
        }
    }

    const BESSEL_REFS: [(f64, f64, f64); 15] = [
        (0.25, 0.05, 3.5877375452640272226),
        (0.25, 0.1, 2.6851568718760591968),
        (0.25, 1.0, 0.43073977444858552466),
        (0.25, 5.0, 0.0037123027320318406383),
        (0.25, 20.0, 5.7500020724036825769e-10),
        (0.5, 0.05, 5.3316325691057585315),
        (0.5, 0.1, 3.5861668387972600251),
        (0.5, 1.0, 0.46106850444789455844),
        (0.5, 5.0, 0.0037766133746428825595),
        (0.5, 20.0, 5.7763739747074446528e-10),
        (0.75, 0.05, 9.617730166147382196),
        (0.75, 0.1, 5.5967025112681315542),
        (0.75, 1.0, 0.51577530069591862858),
        (0.75, 5.0, 0.0038861592549742764936),
        (0.75, 20.0, 5.8205920899327986597e-10),
    ];

    #[test]
    fn bessel_reference_matches_frozen_values() {
        for (s, rho, want) in BESSEL_REFS {
            assert_relative_eq!(bessel_k_reference(s, rho), want, max_relative = 1e-11);
        }
    }

    const PROFILE_REFS: [(f64, f64, f64); 15] = [
        (0.25, 0.05, 0.78696349703168304848),
        (0.25, 0.1, 0.70042410648624273739),
        (0.25, 1.0, 0.19980502117429667895),
        (0.25, 5.0, 0.0025750004410427165528),
        (0.25, 20.0, 5.6404911459717735238e-10),
        (0.5, 0.05, 0.95122942450071400645),
        (0.5, 0.1, 0.90483741803595956814),
        (0.5, 1.0, 0.3678794411714423216),
        (0.5, 5.0, 0.0067379469990854670966),
        (0.5, 20.0, 2.061153622438557828e-9),
        (0.75, 0.05, 0.98690146823157029943),
        (0.75, 0.1, 0.96584164285270576452),
        (0.75, 1.0, 0.50053476184578457112),
        (0.75, 5.0, 0.012610194950790769341),
        (0.75, 20.0, 5.3421166247540779727e-9),
    ];

    #[test]
    fn extension_profile_matches_frozen_values() {
        for (s, rho, want) in PROFILE_REFS {
            let got = extension_profile(s, rho).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn extension_profile_agrees_with_bessel_route() {
        // φ_s(ρ) = 2^{1-s}/Γ(s) ρ^s K_s(ρ): two independent integral
        // representations must coincide.
        for s in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9] {
            for rho in [0.02, 0.3, 2.0, 11.0] {
                let via_profile = extension_profile(s, rho).unwrap();
                let via_bessel =
                    2f64.powf(1.0 - s) / gamma(s) * rho.powf(s) * bessel_k_reference(s, rho);
                assert_relative_eq!(via_profile, via_bessel, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn extension_profile_halving_order_is_exponential() {
        // Closed form at s = 1/2: φ(ρ) = e^{-ρ}.
        for rho in [0.01, 0.5, 1.0, 3.0, 10.0, 40.0] {
            let got = extension_profile(0.5, rho).unwrap();
            assert_relative_eq!(got, (-rho).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn extension_profile_normalization_and_decay() {
        assert_eq!(extension_profile(0.3, 0.0).unwrap(), 1.0);
        assert_eq!(extension_profile(0.3, 601.0).unwrap(), 0.0);
        // Monotone decreasing in ρ.
        let mut prev = 1.0;
        for k in 1..30 {
            let v = extension_profile(0.7, k as f64 * 0.3).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
