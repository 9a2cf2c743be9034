use num_complex::Complex64;

use radrec_core::fixtures::{self, photon_element, photon_profile, photon_profile_derivative, self_energy_element, vertex_element};
use radrec_core::radrec::{
    assemble_cross_section, build_report, enumerate_cuts, extract_amplitude, lowest_order_coefficient,
    se_bound_coefficient, se_free_coefficient, vertex_coefficient, ClassEntry, CutEnvironment, DiagramClass,
    PhotonGrid, RadRecModel, RadRecParts, ResidualTreatment, Warning,
};
use radrec_core::term::{OperatorRef, TermExpression};
use radrec_core::{build_spectrum, ContinuumGrid, EnergyDependentOperator, Error, OperatorMatrix};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn term(entry: &ClassEntry, name: &str) -> Complex64 {
    entry.terms.iter().find(|t| t.name == name).unwrap_or_else(|| panic!("no term {name}")).value
}

/// Single-channel model: bound `a` at −0.5, spare bound level at 0.2, `p`
/// bound at 1.0, constant `A` with `⟨a|A|p⟩ = coupling`.
fn simple(coupling: f64, sigma: EnergyDependentOperator, lambda: EnergyDependentOperator) -> RadRecModel {
    let spectrum = build_spectrum(&[-0.5, 0.2, 1.0], None).unwrap();
    let a = OperatorMatrix::from_real_rows(&[
        vec![0.0, 0.1, coupling],
        vec![0.1, 0.0, 0.05],
        vec![coupling, 0.05, 0.0],
    ])
    .unwrap();
    let photons = PhotonGrid::uniform(0.0, 3.0, 31, EnergyDependentOperator::constant(a, "A")).unwrap();
    RadRecModel::new(RadRecParts::new(spectrum, photons, sigma, lambda, 0, 2)).unwrap()
}

fn zero3() -> EnergyDependentOperator {
    EnergyDependentOperator::zero(3, "0")
}

#[test]
fn lowest_order_examples() {
    let m = simple(0.5, zero3(), zero3());
    assert!((lowest_order_coefficient(&m).unwrap().coefficient - 0.25).abs() < 1e-15);
    assert_eq!(lowest_order_coefficient(&simple(0.0, zero3(), zero3())).unwrap().coefficient, 0.0);
    let two = fixtures::two_target_model([0.3, 0.4]);
    assert!((lowest_order_coefficient(&two).unwrap().coefficient - 0.25).abs() < 1e-15);
}

#[test]
fn pole_outside_photon_grid() {
    let spectrum = build_spectrum(&[-0.5, 1.0], None).unwrap();
    let a = OperatorMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
    let photons = PhotonGrid::uniform(0.0, 1.0, 11, EnergyDependentOperator::constant(a, "A")).unwrap();
    let zero = EnergyDependentOperator::zero(2, "0");
    let m = RadRecModel::new(RadRecParts::new(spectrum, photons, zero.clone(), zero, 0, 1)).unwrap();
    let err = lowest_order_coefficient(&m).unwrap_err();
    assert!(matches!(err.root(), Error::PoleOutsideGrid { .. }), "{err}");
}

#[test]
fn only_lowest_order_without_insertions() {
    let m = simple(0.5, zero3(), zero3());
    let report = build_report(&m).unwrap();
    let classes: Vec<_> = report.classes.iter().map(|c| c.class).collect();
    assert_eq!(classes, vec![DiagramClass::LowestOrder]);
    assert_eq!(report.amplitudes.len(), 1);
    assert_eq!(report.amplitudes[0].value, c(0.5));
}

#[test]
fn zero_sigma_gives_zero_self_energy_terms() {
    let m = simple(0.5, zero3(), zero3());
    let se = se_bound_coefficient(&m).unwrap();
    assert_eq!(se.terms.len(), 4);
    assert!(se.terms.iter().all(|t| t.value == c(0.0)));
    assert_eq!(vertex_coefficient(&m).unwrap().coefficient, 0.0);
}

#[test]
fn vertex_equal_to_photon_coupling() {
    // Λ = A: both terms are |⟨a|A|p⟩|²; the coefficient is their sum times the sign
    let a = OperatorMatrix::from_real_rows(&[vec![0.0, 0.1, 0.5], vec![0.1, 0.0, 0.05], vec![0.5, 0.05, 0.0]]).unwrap();
    let m = simple(0.5, zero3(), EnergyDependentOperator::constant(a, "Λ"));
    let v = vertex_coefficient(&m).unwrap();
    assert!((v.coefficient + 2.0 * 0.25).abs() < 1e-15);
    let flipped = m.with_vertex_sign(1.0).unwrap();
    assert!((vertex_coefficient(&flipped).unwrap().coefficient - 0.5).abs() < 1e-15);
}

/// Term-by-term oracle for the bound self-energy on the four-level fixture,
/// composed from the fixture's matrix-element functions.
#[test]
fn bound_self_energy_matches_dense_oracle() {
    let m = fixtures::four_level_model();
    let e = [-0.5, -0.125, 0.3, 1.0];
    let (q, p) = (0usize, 3usize);
    let (ea, w) = (e[q], e[p] - e[q]);
    let a = |i: usize, j: usize| photon_element(e[i], e[j]) * photon_profile(w);
    let da = |i: usize, j: usize| photon_element(e[i], e[j]) * photon_profile_derivative(w);
    let sigma = |i: usize, j: usize| self_energy_element(ea, e[i], e[j]);
    let dsigma = |i: usize, j: usize| self_energy_element(1.0, e[i], e[j]) - self_energy_element(0.0, e[i], e[j]);
    let mut t1 = c(0.0);
    let mut t2 = c(0.0);
    for (n, &en) in e.iter().enumerate().take(4).skip(1) {
        let g = 1.0 / (ea - en);
        t1 += a(p, q) * sigma(q, n) * g * a(n, p);
        t2 += a(p, n) * g * sigma(n, q) * a(q, p);
    }
    let t3 = (da(p, q) * sigma(q, q) + a(p, q) * dsigma(q, q)) * a(q, p);
    let t4 = da(p, q) * sigma(q, q) * a(q, p);

    let se = se_bound_coefficient(&m).unwrap();
    for (name, oracle) in [("A·ΣΓ_QA", t1), ("AΓ_QΣ·A", t2), ("∂(AΣ)·A", t3), ("∂A·Σ·A", t4)] {
        let got = term(&se, name);
        assert!((got - oracle).norm() <= 1e-10, "{name}: {got} vs {oracle}");
    }
    // terms (i) and (ii) are complex conjugates; the sum is real
    assert!((term(&se, "A·ΣΓ_QA") - term(&se, "AΓ_QΣ·A").conj()).norm() < 1e-15);
    assert!((se.coefficient - (t1 + t2 + t3 + t4).re).abs() < 1e-12);
}

#[test]
fn vertex_matches_dense_oracle() {
    let m = fixtures::four_level_model();
    let e = [-0.5, -0.125, 0.3, 1.0];
    let g = photon_profile(1.5);
    let oracle = -(vertex_element(e[3], e[0]) * photon_element(e[0], e[3]) * g
        + photon_element(e[3], e[0]) * g * vertex_element(e[0], e[3]));
    let v = vertex_coefficient(&m).unwrap();
    assert!((v.coefficient - oracle.re).abs() <= 1e-12);
    assert!(v.imaginary_residue() <= 1e-12);
}

/// Pole part of the free-line self-energy against a fine-grid quadrature of
/// `f(x) / (ε_p − x + iη)` extrapolated to `η → 0`.
#[test]
fn free_self_energy_pole_matches_eta_limit() {
    let m = fixtures::reference_model();
    let (ea, ep) = (m.energy_a(), m.energy_p());
    let g = photon_profile(ep - ea);
    let f = |x: f64| photon_element(ea, x) * g * self_energy_element(ep, x, ep);
    let pole_part = |eta: f64| {
        let n = (2.0 / (eta / 10.0)).ceil() as usize + 1;
        let h = 2.0 / (n - 1) as f64;
        let mut sum = c(0.0);
        for k in 0..n {
            let x = k as f64 * h;
            let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            // Im part of 1/(ε_p − x + iη), the part that survives as the pole
            sum += f(x) * (w * -eta / ((ep - x) * (ep - x) + eta * eta));
        }
        sum * Complex64::new(0.0, 1.0)
    };
    // two Richardson levels remove the O(η) and O(η²) terms
    let [i1, i2, i3] = [0.004, 0.002, 0.001].map(pole_part);
    let (r1, r2) = (i2 * 2.0 - i1, i3 * 2.0 - i2);
    let extrapolated = (r2 * 4.0 - r1) / 3.0;
    let oracle = photon_element(ea, ep).conj() * g * extrapolated;

    let free = se_free_coefficient(&m).unwrap();
    let got = term(&free, "A·AΓ_poleΣ");
    let rel = (got - oracle).norm() / oracle.norm();
    assert!(rel <= 1e-3, "pole {got} vs η-limit {oracle} (relative {rel:e})");
    // the mirrored term carries the conjugate pole
    assert!((term(&free, "ΣΓ_poleA·A") - got.conj()).norm() < 1e-15);
    assert_eq!(free.principal_parts.len(), 2);
}

#[test]
fn free_self_energy_vanishes_without_continuum_coupling() {
    let base = fixtures::reference_model();
    let spectrum = base.spectrum().clone();
    let bound = spectrum.bound_indices();
    let full = base.sigma().evaluate(base.energy_a()).unwrap();
    let masked = OperatorMatrix::from_fn(spectrum.dim(), |i, j| {
        if bound.contains(&i) && bound.contains(&j) {
            full.entries()[(i, j)]
        } else {
            c(0.0)
        }
    });
    let m = RadRecModel::new(RadRecParts::new(
        spectrum,
        base.photons().clone(),
        EnergyDependentOperator::constant(masked, "Σ_bound"),
        base.lambda_vx().clone(),
        base.capture_target(),
        base.initial_state(),
    ))
    .unwrap();
    let free = se_free_coefficient(&m).unwrap();
    assert!(free.terms.iter().all(|t| t.value.norm() == 0.0));
}

#[test]
fn free_self_energy_needs_interior_pole() {
    // ε_p at the upper edge of the continuum
    let spectrum = build_spectrum(&[-0.5], Some(&ContinuumGrid::uniform(0.0, 1.0, 11))).unwrap();
    let e = spectrum.energies();
    let photons = PhotonGrid::uniform(0.0, 3.0, 31, fixtures::photon_coupling(&e)).unwrap();
    let m = RadRecModel::new(RadRecParts::new(
        spectrum,
        photons,
        fixtures::self_energy(&e),
        fixtures::vertex(&e),
        0,
        11,
    ))
    .unwrap();
    let err = se_free_coefficient(&m).unwrap_err();
    assert!(matches!(err.root(), Error::PoleOutsideGrid { .. }), "{err}");
    assert!(build_report(&m).is_err());
}

#[test]
fn cross_section_arithmetic() {
    let m = simple(0.5, zero3(), zero3());
    let entries = vec![lowest_order_coefficient(&m).unwrap()];
    let xs = assemble_cross_section(&entries, &m).unwrap();
    // trapezoid weight of an interior mode on [0, 3] × 31 is 0.1
    let expected = (2.0 * std::f64::consts::PI).powi(3) * 0.25 * 0.1;
    assert!((xs.total - expected).abs() < 1e-12);
    let unit = (2.0 * std::f64::consts::PI).powi(3) * 0.25;
    assert!((unit - 62.012).abs() < 1e-3);
    let slow = m.clone().with_v_i(2.0).unwrap();
    let xs2 = assemble_cross_section(&entries, &slow).unwrap();
    assert!((xs2.total - xs.total / 2.0).abs() < 1e-15);
    let none = simple(0.0, zero3(), zero3());
    let xs0 = assemble_cross_section(&[lowest_order_coefficient(&none).unwrap()], &none).unwrap();
    assert_eq!(xs0.total, 0.0);
}

#[test]
fn totals_are_additive_and_negative_totals_warn() {
    let report = build_report(&fixtures::reference_model()).unwrap();
    let sum: f64 = report.classes.iter().map(|c| c.coefficient).sum();
    assert!((report.total_coefficient - sum).abs() < 1e-15);
    let channel_sum: f64 = report.channels.iter().map(|c| c.coefficient).sum();
    assert!((channel_sum - sum).abs() < 1e-15);

    let strong = fixtures::reference_model().scaled(20.0);
    let r = build_report(&strong).unwrap();
    assert!(r.total_coefficient < 0.0);
    assert!(r.warnings.iter().any(|w| matches!(w, Warning::NonPhysicalCrossSection { .. })));
}

#[test]
fn free_class_is_omitted_without_continuum() {
    let r = build_report(&fixtures::four_level_model()).unwrap();
    assert!(r.class(DiagramClass::SelfEnergyFree).is_none());
    assert!(r
        .warnings
        .iter()
        .any(|w| matches!(w, Warning::ClassOmitted { class: DiagramClass::SelfEnergyFree, .. })));
}

#[test]
fn amplitude_without_insertions_is_the_photon_element() {
    let m = fixtures::reference_model().scaled(0.0);
    let amps = extract_amplitude(&m).unwrap();
    let (ea, ep) = (m.energy_a(), m.energy_p());
    let bare = photon_element(ea, ep) * photon_profile(ep - ea);
    assert!((amps[0].value - bare).norm() < 1e-15);
}

#[test]
fn cut_examples() {
    let m = fixtures::reference_model();
    let lowest = TermExpression::ladder("lowest", &[OperatorRef::Photon, OperatorRef::Photon]).unwrap();
    let cuts = enumerate_cuts(&lowest, &m).unwrap();
    assert_eq!(cuts.len(), 1);
    assert_eq!(cuts[0].environment, CutEnvironment::Continuum);

    let se = TermExpression::ladder("se", &[OperatorRef::Photon, OperatorRef::SelfEnergy, OperatorRef::Photon]).unwrap();
    let cuts = enumerate_cuts(&se, &m).unwrap();
    assert_eq!(cuts.len(), 2);
    // cut at the upper state, then at the lower one
    assert_eq!(cuts[0].cut_index, 1);
    assert_eq!(cuts[1].cut_index, 3);
    for cut in &cuts {
        assert_eq!(cut.residuals.len(), 1);
        assert_eq!(cut.residuals[0].environment, CutEnvironment::Discrete);
        let rewritten = cut.rewritten().unwrap();
        assert!(rewritten.to_string().contains('∂') || rewritten.factors.len() > se.factors.len());
    }

    let vx = TermExpression::ladder("vx", &[OperatorRef::Vertex, OperatorRef::Photon]).unwrap();
    assert_eq!(enumerate_cuts(&vx, &m).unwrap().len(), 1);

    let free = TermExpression::ladder("free", &[OperatorRef::Photon, OperatorRef::Photon, OperatorRef::SelfEnergy]).unwrap();
    let cuts = enumerate_cuts(&free, &m).unwrap();
    assert_eq!(cuts.len(), 1);
    assert_eq!(cuts[0].residuals[0].treatment, ResidualTreatment::HalfPole);

    let unbalanced = TermExpression::ladder("bad", &[OperatorRef::Photon, OperatorRef::SelfEnergy]).unwrap();
    assert!(matches!(enumerate_cuts(&unbalanced, &m), Err(Error::InvalidTerm(_))));
}
