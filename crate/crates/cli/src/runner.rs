//! Execution of validated experiment configs.

use cswap_core::protocol::ControlMode;
use cswap_core::qmath;
use cswap_core::qobjects::{DensityMatrix, UnbiasedObservable};
use cswap_core::{analytics, estimator, purify, twotime};

use crate::config::{build_observable, build_state, tolerance, ExperimentConfig, Variant};
use crate::error::{numeric, CliError};
use crate::report::{ExactBlock, PlanBlock, PurifyBlock, RunReport, SweepRow, TwoTimeBlock};

const DEFAULT_DELTA: f64 = 0.05;
const DEFAULT_K: u64 = 100_000;

fn require<'a, T>(value: &'a Option<T>, field: &str, variant: Variant) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::config(field, format!("required by the {variant:?} variant",)))
}

struct PrePost {
    rho_in: DensityMatrix,
    rho_fin: DensityMatrix,
}

fn build_pre_post(config: &ExperimentConfig, tol: f64) -> Result<PrePost, CliError> {
    let rho_in = build_state(
        require(&config.rho_in, "rho_in", config.variant)?,
        "rho_in",
        tol,
    )?;
    let rho_fin = build_state(
        require(&config.rho_fin, "rho_fin", config.variant)?,
        "rho_fin",
        tol,
    )?;
    if rho_in.dim() != rho_fin.dim() {
        return Err(CliError::config(
            "rho_fin",
            format!(
                "dimension {} does not match rho_in dimension {}",
                rho_fin.dim(),
                rho_in.dim()
            ),
        ));
    }
    Ok(PrePost { rho_in, rho_fin })
}

fn check_dim(obs: &UnbiasedObservable, d: usize, field: &str) -> Result<(), CliError> {
    if obs.dim() != d {
        return Err(CliError::config(
            field,
            format!(
                "observable dimension {} does not match state dimension {d}",
                obs.dim()
            ),
        ));
    }
    Ok(())
}

fn sampling_params(config: &ExperimentConfig) -> (u64, f64, u64, ControlMode) {
    (
        config.k.unwrap_or(DEFAULT_K),
        config.delta.unwrap_or(DEFAULT_DELTA),
        config.seed.unwrap_or(0),
        config.mode.unwrap_or(ControlMode::Split),
    )
}

/// Execute one validated config and assemble its report.
///
/// Estimation variants always evaluate the exact oracle as well and report
/// the residual |estimate − exact|.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let tol = tolerance();
    let mut report = RunReport::new(config.clone());
    match config.variant {
        Variant::Exact => {
            let states = build_pre_post(config, tol)?;
            let obs_spec = require(&config.observable, "observable", config.variant)?;
            let obs = build_observable(obs_spec, "observable", tol)?;
            check_dim(&obs, states.rho_in.dim(), "observable")?;
            let w = analytics::weak_value(obs.observable(), &states.rho_in, &states.rho_fin)
                .map_err(numeric("weak value"))?;
            let mut exact = ExactBlock::new(w.value, w.overlap);
            exact.hermitian_observable = Some(w.hermitian_observable);
            if let Some(spec_b) = &config.observable_b {
                let obs_b = build_observable(spec_b, "observable_b", tol)?;
                check_dim(&obs_b, states.rho_in.dim(), "observable_b")?;
                let w2 = analytics::double_weak_value(
                    obs.observable(),
                    obs_b.observable(),
                    &states.rho_in,
                    &states.rho_fin,
                )
                .map_err(numeric("double weak value"))?;
                exact.double_weak_value = Some([w2.re, w2.im]);
            }
            report.exact = Some(exact);
        }

        Variant::Fig1a => {
            let states = build_pre_post(config, tol)?;
            let obs_spec = require(&config.observable, "observable", config.variant)?;
            let obs = build_observable(obs_spec, "observable", tol)?;
            check_dim(&obs, states.rho_in.dim(), "observable")?;
            let (k, delta, seed, mode) = sampling_params(config);
            let w = analytics::weak_value(obs.observable(), &states.rho_in, &states.rho_fin)
                .map_err(numeric("weak value oracle"))?;
            let est = estimator::estimate_weak_value(
                &obs,
                &states.rho_in,
                &states.rho_fin,
                k,
                delta,
                seed,
                mode,
            )
            .map_err(numeric("weak value estimation"))?;
            report.plan = plan_for_target(config, delta, obs.x_max(), w.value.norm(), w.overlap);
            report.residual = Some((est.estimate - w.value).norm());
            report.exact = Some(ExactBlock::new(w.value, w.overlap));
            report.estimate = Some(est);
        }

        Variant::Fig1b => {
            let states = build_pre_post(config, tol)?;
            let obs = build_observable(
                require(&config.observable, "observable", config.variant)?,
                "observable",
                tol,
            )?;
            let obs_b = build_observable(
                require(&config.observable_b, "observable_b", config.variant)?,
                "observable_b",
                tol,
            )?;
            check_dim(&obs, states.rho_in.dim(), "observable")?;
            check_dim(&obs_b, states.rho_in.dim(), "observable_b")?;
            let (k, delta, seed, mode) = sampling_params(config);
            let w2 = analytics::double_weak_value(
                obs.observable(),
                obs_b.observable(),
                &states.rho_in,
                &states.rho_fin,
            )
            .map_err(numeric("double weak value oracle"))?;
            let overlap = analytics::overlap(&states.rho_in, &states.rho_fin);
            let est = estimator::estimate_double_weak_value(
                &obs,
                &obs_b,
                &states.rho_in,
                &states.rho_fin,
                k,
                delta,
                seed,
                mode,
            )
            .map_err(numeric("double weak value estimation"))?;
            report.plan = plan_for_target(
                config,
                delta,
                obs.x_max() * obs_b.x_max(),
                w2.norm(),
                overlap,
            );
            report.residual = Some((est.estimate - w2).norm());
            report.exact = Some(ExactBlock::new(w2, overlap));
            report.estimate = Some(est);
        }

        Variant::Fig1c => {
            let rho_joint = build_state(
                require(&config.rho_joint, "rho_joint", config.variant)?,
                "rho_joint",
                tol,
            )?;
            let d = rho_joint
                .equal_bipartite_dim()
                .map_err(|e| CliError::config("rho_joint", e))?;
            let obs = build_observable(
                require(&config.observable, "observable", config.variant)?,
                "observable",
                tol,
            )?;
            let obs_b = build_observable(
                require(&config.observable_b, "observable_b", config.variant)?,
                "observable_b",
                tol,
            )?;
            check_dim(&obs, d, "observable")?;
            check_dim(&obs_b, d, "observable_b")?;
            let (k, delta, seed, mode) = sampling_params(config);
            let exact =
                twotime::pseudo_expectation(&rho_joint, obs.observable(), obs_b.observable())
                    .map_err(numeric("SWAP-functional oracle"))?;
            let denom = (rho_joint.matrix() * qmath::swap_operator(d)).trace().re;
            let est = estimator::estimate_pair_swap_functional(
                &obs, &obs_b, &rho_joint, k, delta, seed, mode,
            )
            .map_err(numeric("SWAP-functional estimation"))?;
            report.residual = Some((est.estimate - exact).norm());
            report.exact = Some(ExactBlock::new(exact, denom));
            report.estimate = Some(est);
        }

        Variant::Fig1d => {
            let rho_joint = build_state(
                require(&config.rho_joint, "rho_joint", config.variant)?,
                "rho_joint",
                tol,
            )?;
            let d = rho_joint
                .equal_bipartite_dim()
                .map_err(|e| CliError::config("rho_joint", e))?;
            let obs = build_observable(
                require(&config.joint_observable, "joint_observable", config.variant)?,
                "joint_observable",
                tol,
            )?;
            check_dim(&obs, d * d, "joint_observable")?;
            let (k, delta, seed, mode) = sampling_params(config);
            let exact = twotime::pseudo_expectation_op(&rho_joint, obs.observable())
                .map_err(numeric("SWAP-functional oracle"))?;
            let denom = (rho_joint.matrix() * qmath::swap_operator(d)).trace().re;
            let est = estimator::estimate_swap_functional(&obs, &rho_joint, k, delta, seed, mode)
                .map_err(numeric("SWAP-functional estimation"))?;
            report.residual = Some((est.estimate - exact).norm());
            report.exact = Some(ExactBlock::new(exact, denom));
            report.estimate = Some(est);
        }

        Variant::Plan => {
            let epsilon = *require(&config.epsilon, "epsilon", config.variant)?;
            let delta = config.delta.unwrap_or(DEFAULT_DELTA);
            // x_max, |W| guess and overlap come from the config, or from the
            // states and observable when those are given instead
            let (x_max, w_guess, overlap) = plan_inputs(config, tol, epsilon)?;
            let plan = estimator::plan_samples(epsilon, delta, x_max, w_guess, overlap)
                .map_err(numeric("sample planning"))?;
            report.plan = Some(PlanBlock {
                k_exact: plan.exact,
                k_leading: plan.leading,
                epsilon,
                delta,
                x_max,
                w_guess,
                overlap,
            });
        }

        Variant::Twotime => {
            let rho_joint = build_state(
                require(&config.rho_joint, "rho_joint", config.variant)?,
                "rho_joint",
                tol,
            )?;
            let d = rho_joint
                .equal_bipartite_dim()
                .map_err(|e| CliError::config("rho_joint", e))?;
            let overlap = twotime::swap_overlap(&rho_joint).map_err(numeric("SWAP overlap"))?;
            let ppt = twotime::is_ppt(&rho_joint).map_err(numeric("PPT check"))?;
            let mut block = TwoTimeBlock {
                swap_overlap: overlap,
                ppt: ppt.ppt,
                min_eigenvalue_t2: ppt.min_eigenvalue,
                omega: None,
                pseudo: None,
                transpose_gap: None,
            };
            if let (Some(spec_a), Some(spec_b)) = (&config.observable, &config.observable_b) {
                let a = build_observable(spec_a, "observable", tol)?;
                let b = build_observable(spec_b, "observable_b", tol)?;
                check_dim(&a, d, "observable")?;
                check_dim(&b, d, "observable_b")?;
                let state = twotime::normalized_from_density(&rho_joint)
                    .map_err(numeric("two-time normalization"))?;
                let omega = state
                    .eval(a.observable(), b.observable())
                    .map_err(numeric("two-time evaluation"))?;
                let pseudo =
                    twotime::pseudo_expectation(&rho_joint, a.observable(), b.observable())
                        .map_err(numeric("pseudo-expectation"))?;
                block.omega = Some([omega.re, omega.im]);
                block.pseudo = Some([pseudo.re, pseudo.im]);
                block.transpose_gap = Some((omega - pseudo).norm());
            }
            report.two_time = Some(block);
        }

        Variant::Purify => {
            let states = build_pre_post(config, tol)?;
            let d = states.rho_in.dim();
            let mu = analytics::overlap(&states.rho_in, &states.rho_fin);
            let vaid = purify::vaidman_purification(&states.rho_in, &states.rho_fin)
                .map_err(numeric("purification"))?;
            let dbl = purify::double_purification(&states.rho_in, &states.rho_fin)
                .map_err(numeric("purification"))?;
            let mut block = PurifyBlock {
                overlap_in_fin: mu,
                vaidman_overlap: vaid.overlap,
                vaidman_overlap_formula: mu / d as f64,
                double_overlap: dbl.overlap,
                double_overlap_formula: mu * mu,
                vaidman_residual: None,
                double_residual: None,
            };
            if let Some(spec_a) = &config.observable {
                let a = build_observable(spec_a, "observable", tol)?;
                check_dim(&a, d, "observable")?;
                let direct = analytics::weak_value(a.observable(), &states.rho_in, &states.rho_fin)
                    .map_err(numeric("weak value"))?;
                let lifted = qmath::kron(a.observable(), &qmath::identity(d * d * d));
                let purified = analytics::pure_weak_value(&lifted, &vaid.psi_in, &vaid.psi_fin)
                    .map_err(numeric("purified weak value"))?;
                block.vaidman_residual = Some((purified - direct.value).norm());
                if let Some(spec_b) = &config.observable_b {
                    let b = build_observable(spec_b, "observable_b", tol)?;
                    check_dim(&b, d, "observable_b")?;
                    let w2 = analytics::double_weak_value(
                        a.observable(),
                        b.observable(),
                        &states.rho_in,
                        &states.rho_fin,
                    )
                    .map_err(numeric("double weak value"))?;
                    let lifted2 = qmath::kron(
                        &qmath::kron(a.observable(), b.observable()),
                        &qmath::identity(d * d),
                    );
                    let purified2 = analytics::pure_weak_value(&lifted2, &dbl.psi_in, &dbl.psi_fin)
                        .map_err(numeric("purified double weak value"))?;
                    block.double_residual = Some((purified2 - w2).norm());
                }
            }
            report.purify = Some(block);
        }
    }
    Ok(report)
}

/// Planned run count for an estimation config carrying a target `epsilon`,
/// using the exactly known weak value magnitude and overlap.
fn plan_for_target(
    config: &ExperimentConfig,
    delta: f64,
    x_max: f64,
    w_magnitude: f64,
    overlap: f64,
) -> Option<PlanBlock> {
    let epsilon = config.epsilon?;
    let plan = estimator::plan_samples(epsilon, delta, x_max, w_magnitude, overlap).ok()?;
    Some(PlanBlock {
        k_exact: plan.exact,
        k_leading: plan.leading,
        epsilon,
        delta,
        x_max,
        w_guess: w_magnitude,
        overlap,
    })
}

fn plan_inputs(
    config: &ExperimentConfig,
    tol: f64,
    _epsilon: f64,
) -> Result<(f64, f64, f64), CliError> {
    let obs = config
        .observable
        .as_ref()
        .map(|spec| build_observable(spec, "observable", tol))
        .transpose()?;
    let x_max = match (config.x_max, &obs) {
        (Some(x), _) => x,
        (None, Some(o)) => o.x_max(),
        (None, None) => {
            return Err(CliError::config("x_max", "provide x_max or an observable"));
        }
    };
    let states = match (&config.rho_in, &config.rho_fin) {
        (Some(_), Some(_)) => Some(build_pre_post(config, tol)?),
        _ => None,
    };
    let overlap = match (config.overlap, &states) {
        (Some(mu), _) => mu,
        (None, Some(s)) => analytics::overlap(&s.rho_in, &s.rho_fin),
        (None, None) => {
            return Err(CliError::config(
                "overlap",
                "provide overlap or both states",
            ));
        }
    };
    let w_guess = match (config.w_guess, &states, &obs) {
        (Some(w), _, _) => w,
        (None, Some(s), Some(o)) => analytics::weak_value(o.observable(), &s.rho_in, &s.rho_fin)
            .map_err(numeric("weak value for planning"))?
            .value
            .norm(),
        // anomalous weak values can exceed x_max; this default is a guess,
        // not a bound
        _ => x_max,
    };
    Ok((x_max, w_guess, overlap))
}

/// Derive the seed for sweep cell `index` from the config-level seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 step
    let mut z = base.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run the config once per axis value, patching the named field each time.
///
/// `axis` is a JSON pointer into the config document (`/k`, `/epsilon`,
/// `/rho_in/p`, ...). Integer-valued entries are patched as integers so
/// count-typed fields accept them. Unless the axis is `/seed`, each cell gets
/// a sub-seed derived from the config seed and the cell index.
pub fn sweep(
    raw_config: &serde_json::Value,
    axis: &str,
    values: &[f64],
) -> Result<Vec<(RunReport, SweepRow)>, CliError> {
    let mut out = Vec::with_capacity(values.len());
    for (index, &value) in values.iter().enumerate() {
        let mut patched = raw_config.clone();
        patch_pointer(&mut patched, axis, value)?;
        let mut config: ExperimentConfig =
            serde_json::from_value(patched).map_err(|e| CliError::config("<config>", e))?;
        if axis != "/seed" {
            let base = config.seed.unwrap_or(0);
            config.seed = Some(derive_seed(base, index as u64));
        }
        let report = run(&config)?;
        let row = SweepRow::from_report(axis, value, &report);
        out.push((report, row));
    }
    Ok(out)
}

fn patch_pointer(doc: &mut serde_json::Value, axis: &str, value: f64) -> Result<(), CliError> {
    let number = if value.fract() == 0.0 && value >= 0.0 && value <= u64::MAX as f64 {
        serde_json::Value::from(value as u64)
    } else {
        serde_json::Number::from_f64(value)
            .map(serde_json::Value::Number)
            .ok_or_else(|| CliError::config(axis, "value is not a finite number"))?
    };
    if let Some(slot) = doc.pointer_mut(axis) {
        *slot = number;
        return Ok(());
    }
    // pointer to a missing leaf: insert into the parent object
    let (parent_path, key) = axis
        .rsplit_once('/')
        .ok_or_else(|| CliError::config(axis, "axis must be a JSON pointer like /k"))?;
    let parent = if parent_path.is_empty() {
        Some(&mut *doc)
    } else {
        doc.pointer_mut(parent_path)
    };
    match parent.and_then(|p| p.as_object_mut()) {
        Some(map) if !key.is_empty() => {
            map.insert(key.to_string(), number);
            Ok(())
        }
        _ => Err(CliError::config(axis, "axis does not name a config field")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn exact_variant_reproduces_the_lopsided_third() {
        let config = parse(
            r#"{
                "variant": "exact",
                "rho_in": {"preset": "plus"},
                "rho_fin": {"ket": [[2, 0], [1, 0]]},
                "observable": {"pauli": "Z"}
            }"#,
        );
        let report = run(&config).unwrap();
        let exact = report.exact.unwrap();
        assert!((exact.value[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!(exact.value[1].abs() < 1e-13);
        assert!((exact.overlap - 0.9).abs() < 1e-12);
    }

    #[test]
    fn estimation_carries_oracle_and_residual() {
        let config = parse(
            r#"{
                "variant": "fig1a",
                "rho_in": {"preset": "plus"},
                "rho_fin": {"ket": [[2, 0], [1, 0]]},
                "observable": {"pauli": "Z"},
                "k": 200000, "delta": 0.05, "seed": 42
            }"#,
        );
        let report = run(&config).unwrap();
        let est = report.estimate.unwrap();
        let exact = report.exact.unwrap();
        assert!((exact.value[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!(report.residual.unwrap() < 0.02);
        assert!(est.epsilon_total.is_some());
    }

    #[test]
    fn plan_variant_computes_from_states_when_fields_missing() {
        let config = parse(
            r#"{
                "variant": "plan",
                "rho_in": {"preset": "plus"},
                "rho_fin": {"ket": [[2, 0], [1, 0]]},
                "observable": {"pauli": "Z"},
                "epsilon": 0.05, "delta": 0.1
            }"#,
        );
        let report = run(&config).unwrap();
        let plan = report.plan.unwrap();
        assert_eq!(plan.x_max, 1.0);
        assert!((plan.overlap - 0.9).abs() < 1e-12);
        assert!((plan.w_guess - 1.0 / 3.0).abs() < 1e-12);
        assert!(plan.k_exact > 10_000);
    }

    #[test]
    fn orthogonal_states_fail_with_numeric_exit_code() {
        let config = parse(
            r#"{
                "variant": "exact",
                "rho_in": {"preset": "zero"},
                "rho_fin": {"preset": "one"},
                "observable": {"pauli": "Z"}
            }"#,
        );
        let err = run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.hint().is_some());
    }

    #[test]
    fn missing_fields_fail_with_config_exit_code() {
        let config = parse(r#"{"variant": "fig1a", "rho_in": {"preset": "plus"}}"#);
        let err = run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn twotime_variant_reports_ppt_and_gap() {
        let config = parse(
            r#"{
                "variant": "twotime",
                "rho_joint": {"preset": "bell"},
                "observable": {"pauli": "Z"},
                "observable_b": {"pauli": "Z"}
            }"#,
        );
        let report = run(&config).unwrap();
        let block = report.two_time.unwrap();
        assert!(!block.ppt);
        assert!((block.min_eigenvalue_t2 + 0.5).abs() < 1e-10);
        assert!((block.swap_overlap - 2.0).abs() < 1e-10);
    }

    #[test]
    fn purify_variant_reports_overlaps_and_residuals() {
        let config = parse(
            r#"{
                "variant": "purify",
                "rho_in": {"preset": "max_mixed"},
                "rho_fin": {"preset": "plus"},
                "observable": {"pauli": "Z"},
                "observable_b": {"pauli": "X"}
            }"#,
        );
        let report = run(&config).unwrap();
        let block = report.purify.unwrap();
        assert!((block.vaidman_overlap - block.vaidman_overlap_formula).abs() < 1e-12);
        assert!((block.double_overlap - block.double_overlap_formula).abs() < 1e-12);
        assert!(block.vaidman_residual.unwrap() < 1e-10);
        assert!(block.double_residual.unwrap() < 1e-10);
    }

    #[test]
    fn sweep_patches_axis_and_derives_seeds() {
        let raw: serde_json::Value = serde_json::from_str(
            r#"{
                "variant": "fig1a",
                "rho_in": {"preset": "plus"},
                "rho_fin": {"ket": [[2, 0], [1, 0]]},
                "observable": {"pauli": "Z"},
                "delta": 0.05, "seed": 9
            }"#,
        )
        .unwrap();
        let rows = sweep(&raw, "/k", &[1000.0, 4000.0]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].1.k, Some(1000));
        assert_eq!(rows[1].1.k, Some(4000));
        assert_ne!(rows[0].1.seed, rows[1].1.seed);
        // same sweep again is identical
        let again = sweep(&raw, "/k", &[1000.0, 4000.0]).unwrap();
        assert_eq!(rows[0].1, again[0].1);
    }

    #[test]
    fn sweep_on_a_preset_parameter() {
        let raw: serde_json::Value = serde_json::from_str(
            r#"{
                "variant": "twotime",
                "rho_joint": {"preset": "werner", "p": 0.0}
            }"#,
        )
        .unwrap();
        let rows = sweep(&raw, "/rho_joint/p", &[0.2, 0.9]).unwrap();
        assert!(rows[0].0.two_time.as_ref().unwrap().ppt);
        assert!(!rows[1].0.two_time.as_ref().unwrap().ppt);
    }

    #[test]
    fn empty_sweep_is_empty_success() {
        let raw: serde_json::Value = serde_json::from_str(r#"{"variant": "exact"}"#).unwrap();
        let rows = sweep(&raw, "/k", &[]).unwrap();
        assert!(rows.is_empty());
    }
}
