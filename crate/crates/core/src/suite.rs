//! Headline reproduction suite.
//!
//! Runs every published check in one fixed order and collects a verdict
//! plus the measured numbers for each, so a single JSON artifact tells the
//! whole story.  Items that depend on wavepacket propagation can be
//! skipped to keep the static part fast.

use crate::atom::{
    adiabatic_parameters, adiabatic_survey, reduced_mass, standard_isotopes, AdiabaticBounds,
    PhysicalConstants,
};
use crate::coords::{kinetic_separation_check, CoordinateScheme};
use crate::dynamics::scenarios::{
    erasure_scenario, pointer_sieve, scenario_a_params, scenario_b_params, sg_scenario,
    standard_candidates, standard_sieve_setup,
};
use crate::error::Result;
use crate::potential::{conformance_check, scaling_exponent};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Acceptance thresholds, all overridable from a JSON file.  Fields fall
/// back to the documented defaults; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub adiabatic: AdiabaticBounds,
    pub kinetic_residual_max: f64,
    pub conformance_rel_std_max: f64,
    pub conformance_unity_window: f64,
    pub scaling_exponent_min: f64,
    pub scaling_exponent_max: f64,
    pub r_fidelity_min: f64,
    pub spin_entropy_factor: f64,
    pub separation_widths_min: f64,
    pub record_overlap_max: f64,
    pub offdiag_norm_max: f64,
    pub cm_purity_window: f64,
    pub p_plus_tol: f64,
    pub visibility_restored_min: f64,
    pub visibility_recorded_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            adiabatic: AdiabaticBounds::default(),
            kinetic_residual_max: 1e-12,
            conformance_rel_std_max: 1e-6,
            conformance_unity_window: 1e-6,
            scaling_exponent_min: 1.5,
            scaling_exponent_max: 2.5,
            r_fidelity_min: 1.0 - 1e-8,
            spin_entropy_factor: 0.99,
            separation_widths_min: 4.0,
            record_overlap_max: 0.05,
            offdiag_norm_max: 0.06,
            cm_purity_window: 0.01,
            p_plus_tol: 1e-6,
            visibility_restored_min: 0.99,
            visibility_recorded_max: 0.06,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub skip_dynamics: bool,
    pub tolerances: Tolerances,
    /// Recorded for provenance; the suite itself is deterministic, the seed
    /// governs the randomized property suites that accompany it.
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            skip_dynamics: false,
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
        }
    }
}

/// Default seed for every randomized check in the project.
pub const DEFAULT_SEED: u64 = 1836;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteItem {
    pub name: String,
    pub passed: bool,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub skip_dynamics: bool,
    pub tolerances: Tolerances,
    pub items: Vec<SuiteItem>,
    pub all_passed: bool,
}

fn run_item(name: &str, f: impl FnOnce() -> Result<(bool, Value)>) -> SuiteItem {
    let (passed, details) = match f() {
        Ok(pair) => pair,
        Err(e) => (false, json!({ "error": e.to_string(), "kind": e.kind() })),
    };
    SuiteItem {
        name: name.to_string(),
        passed,
        details,
    }
}

fn adiabatic_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let rows = adiabatic_survey(
        &standard_isotopes(),
        &PhysicalConstants::default(),
        &tol.adiabatic,
    )?;
    let all = rows.iter().all(|r| r.within_bounds);
    let detail = json!({
        "bounds": tol.adiabatic,
        "rows": rows.iter().map(|r| json!({
            "atom": r.atom.name,
            "mass_number": r.atom.mass_number,
            "kappa1": r.report.kappa1,
            "kappa2": r.report.kappa2,
            "kappa3": r.report.kappa3,
            "correction_norm": r.report.correction_norm,
            "within_bounds": r.within_bounds,
            "violations": r.violations,
        })).collect::<Vec<_>>(),
    });
    Ok((all, detail))
}

fn reduced_mass_item() -> Result<(bool, Value)> {
    let constants = PhysicalConstants::default();
    let mut rows = Vec::new();
    let mut ok = true;
    for a in [1u32, 2, 4, 20, 107, 238] {
        let mu = reduced_mass(a, &constants)?;
        let expected = (1.0 - 1.0 / a as f64) * constants.nucleon_mass;
        let exact = (mu - expected).abs() <= 1e-12 * constants.nucleon_mass;
        ok &= exact;
        rows.push(json!({ "mass_number": a, "mu": mu, "relation_holds": exact }));
    }
    // A lone nucleus has no internal coordinates at all.
    let single = adiabatic_parameters(1, &constants);
    let excluded = matches!(single, Err(crate::error::Error::NoRelativeSystem));
    ok &= excluded;
    Ok((
        ok,
        json!({ "rows": rows, "single_constituent_excluded": excluded }),
    ))
}

fn kinetic_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let nucleon = PhysicalConstants::default().nucleon_mass;
    let cases: [(&str, Vec<f64>); 3] = [
        ("three_equal_nucleons", vec![nucleon; 3]),
        ("five_equal_nucleons", vec![nucleon; 5]),
        ("electron_nucleus_pair", vec![1.0, nucleon]),
    ];
    let mut rows = Vec::new();
    let mut ok = true;
    for (label, masses) in &cases {
        let check = kinetic_separation_check(masses, CoordinateScheme::Jacobi)?;
        let pass = check.residual <= tol.kinetic_residual_max;
        ok &= pass;
        rows.push(json!({
            "case": label,
            "residual": check.residual,
            "inverse_masses": check.inverse_masses,
            "within_tolerance": pass,
        }));
    }
    // The naive difference scheme does not separate; its residual is
    // reported as the contrast case.
    let naive = kinetic_separation_check(
        &[1.0, nucleon, nucleon],
        CoordinateScheme::PairwiseDifference,
    )?;
    Ok((
        ok,
        json!({ "rows": rows, "pairwise_difference_residual": naive.residual }),
    ))
}

/// Log-spaced separation grid shared by the conformance checks.
pub fn standard_conformance_grid() -> Vec<f64> {
    let (lo, hi) = (0.05f64, 5.0f64);
    let n = 24;
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn conformance_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let grid = standard_conformance_grid();
    let mut rows = Vec::new();
    let mut ok = true;
    for z in [2u32, 10, 28] {
        let report = conformance_check(z, 1.0, &grid)?;
        let structural = report.ratio_rel_std <= tol.conformance_rel_std_max;
        let near_unity = (report.ratio_mean - 1.0).abs() <= tol.conformance_unity_window;
        let flag_consistent = report.exact_match == (structural && near_unity);
        ok &= structural && flag_consistent;
        rows.push(json!({
            "z": z,
            "ratio_mean": report.ratio_mean,
            "ratio_rel_std": report.ratio_rel_std,
            "structural_match": structural,
            "exact_match": report.exact_match,
        }));
    }
    Ok((
        ok,
        json!({
            "rows": rows,
            "notes": "the closed form sits at a constant ratio to the quadrature \
                      (a doubled spin-pairing factor); flagged via exact_match, not hidden",
        }),
    ))
}

fn scaling_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let report = scaling_exponent(&[2, 10, 28], 0.1, 1.0)?;
    let pass =
        report.exponent >= tol.scaling_exponent_min && report.exponent <= tol.scaling_exponent_max;
    Ok((
        pass,
        json!({
            "exponent": report.exponent,
            "fit_residual": report.fit_residual,
            "window": [tol.scaling_exponent_min, tol.scaling_exponent_max],
        }),
    ))
}

fn scenario_a_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let (report, _) = sg_scenario(&scenario_a_params())?;
    let s = report.summary;
    let fid_ok = s.r_ground_fidelity >= tol.r_fidelity_min;
    let sep_ok = s.separation_in_widths >= tol.separation_widths_min;
    let ent_ok = s.final_spin_entropy >= tol.spin_entropy_factor * std::f64::consts::LN_2;
    Ok((
        fid_ok && sep_ok && ent_ok,
        json!({
            "summary": serde_json::to_value(s).expect("summary serializes"),
            "r_fidelity_ok": fid_ok,
            "separation_ok": sep_ok,
            "spin_entropy_ok": ent_ok,
        }),
    ))
}

fn scenario_b_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let (report, _) = sg_scenario(&scenario_b_params())?;
    let s = report.summary;
    let overlap_ok = s.record_overlap <= tol.record_overlap_max;
    let offdiag_ok = s.offdiag_norm <= tol.offdiag_norm_max;
    let purity_ok = (s.cm_purity - 0.5).abs() <= tol.cm_purity_window;
    let monotone = report
        .record
        .record_overlap
        .windows(2)
        .all(|p| p[1] <= p[0] + 1e-9);
    Ok((
        overlap_ok && offdiag_ok && purity_ok && monotone,
        json!({
            "summary": serde_json::to_value(s).expect("summary serializes"),
            "record_overlap_ok": overlap_ok,
            "offdiag_ok": offdiag_ok,
            "purity_ok": purity_ok,
            "overlap_monotone": monotone,
        }),
    ))
}

fn erasure_item(tol: &Tolerances) -> Result<(bool, Value)> {
    let restored = erasure_scenario(&scenario_a_params())?;
    let recorded = erasure_scenario(&scenario_b_params())?;
    let p_ok = (restored.p_plus - 0.5).abs() <= tol.p_plus_tol
        && (recorded.p_plus - 0.5).abs() <= tol.p_plus_tol;
    let restored_ok = restored.visibility_conditioned >= tol.visibility_restored_min;
    let recorded_ok = recorded.visibility_conditioned <= tol.visibility_recorded_max;
    Ok((
        p_ok && restored_ok && recorded_ok,
        json!({
            "without_records": serde_json::to_value(restored).expect("report serializes"),
            "with_records": serde_json::to_value(recorded).expect("report serializes"),
            "p_plus_ok": p_ok,
            "visibility_restored_ok": restored_ok,
            "visibility_suppressed_ok": recorded_ok,
        }),
    ))
}

fn sieve_item() -> Result<(bool, Value)> {
    let (grid, env) = standard_sieve_setup();
    let candidates = standard_candidates(&grid);
    let report = pointer_sieve(&candidates, &grid, &env, 1.0)?;
    let minimal_first = report
        .entries
        .first()
        .map(|e| e.label == "minimal")
        .unwrap_or(false);
    Ok((
        minimal_first && !report.tied,
        json!({
            "entries": serde_json::to_value(&report.entries).expect("entries serialize"),
            "spread": report.spread,
            "tied": report.tied,
        }),
    ))
}

/// Names of the suite items, in execution order.  The first five are
/// static; the rest propagate wavepackets.
pub const STATIC_ITEMS: [&str; 5] = [
    "adiabatic_bounds_table",
    "reduced_mass_values",
    "kinetic_separation",
    "potential_conformance",
    "z2_scaling",
];
pub const DYNAMIC_ITEMS: [&str; 4] = ["scenario_a", "scenario_b", "erasure_pair", "pointer_sieve"];

pub fn reproduce(opts: &SuiteOptions) -> SuiteSummary {
    let tol = &opts.tolerances;
    let mut items = vec![
        run_item(STATIC_ITEMS[0], || adiabatic_item(tol)),
        run_item(STATIC_ITEMS[1], reduced_mass_item),
        run_item(STATIC_ITEMS[2], || kinetic_item(tol)),
        run_item(STATIC_ITEMS[3], || conformance_item(tol)),
        run_item(STATIC_ITEMS[4], || scaling_item(tol)),
    ];
    if !opts.skip_dynamics {
        items.push(run_item(DYNAMIC_ITEMS[0], || scenario_a_item(tol)));
        items.push(run_item(DYNAMIC_ITEMS[1], || scenario_b_item(tol)));
        items.push(run_item(DYNAMIC_ITEMS[2], || erasure_item(tol)));
        items.push(run_item(DYNAMIC_ITEMS[3], sieve_item));
    }
    let all_passed = items.iter().all(|i| i.passed);
    SuiteSummary {
        schema_version: 1,
        seed: opts.seed,
        skip_dynamics: opts.skip_dynamics,
        tolerances: tol.clone(),
        items,
        all_passed,
    }
}
