//! Flag combinations checked before any file is read.

use binned_income::estimate::{EstimateConfig, Method};
use binned_income::parametric::{Family, ModelChoice};
use binned_income::subdivision::SubdivisionParams;

use crate::args::{Criterion, MethodName, MethodOptions};

pub type ConfigResult<T> = Result<T, String>;

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Midpoint => "midpoint",
            MethodName::Step => "step",
            MethodName::Spline => "spline",
            MethodName::Subdivide => "subdivide",
            MethodName::Parametric => "parametric",
        }
    }
}

fn choice(options: &MethodOptions) -> ModelChoice {
    match (options.select, options.average) {
        (_, Some(Criterion::Aic)) => ModelChoice::AverageAic,
        (_, Some(Criterion::Bic)) => ModelChoice::AverageBic,
        (Some(Criterion::Bic), None) => ModelChoice::SelectBic,
        _ => ModelChoice::SelectAic,
    }
}

/// Rejects options that do not apply to any of `methods`.
pub fn check_options(methods: &[MethodName], options: &MethodOptions, have_refs: bool) -> ConfigResult<()> {
    let uses = |m: MethodName| methods.contains(&m);
    if options.mean_match && options.mean.is_none() && !have_refs {
        return Err("--mean-match needs a known mean: pass --refs or --mean".into());
    }
    if options.mean.is_some() && !options.mean_match {
        return Err("--mean needs --mean-match".into());
    }
    if let Some(m) = options.mean {
        if !(m > 0.0 && m.is_finite()) {
            return Err(format!("--mean must be positive, got {m}"));
        }
    }
    if options.mean_match && methods == [MethodName::Parametric] {
        return Err("--mean-match does not apply to --method parametric".into());
    }
    if options.tail.is_some() && !uses(MethodName::Step) && !uses(MethodName::Subdivide) {
        return Err("--tail needs --method step or subdivide".into());
    }
    let parametric_only = !options.families.is_empty() || options.select.is_some() || options.average.is_some();
    if parametric_only && !uses(MethodName::Parametric) {
        return Err("--families, --select and --average need --method parametric".into());
    }
    let subdivide_only = options.eps1.is_some() || options.eps2.is_some() || options.rounds.is_some();
    if subdivide_only && !uses(MethodName::Subdivide) {
        return Err("--eps1, --eps2 and --rounds need --method subdivide".into());
    }
    subdivision_params(options).validate().map_err(|e| format!("--eps1/--eps2: {e}"))?;
    Ok(())
}

fn subdivision_params(options: &MethodOptions) -> SubdivisionParams {
    let d = SubdivisionParams::default();
    SubdivisionParams {
        eps1: options.eps1.unwrap_or(d.eps1),
        eps2: options.eps2.unwrap_or(d.eps2),
        rounds: options.rounds.unwrap_or(d.rounds),
    }
}

/// The estimator for `method`. Mean matching is dropped for parametric fits,
/// which have no mean constraint.
pub fn estimate_config(method: MethodName, options: &MethodOptions) -> EstimateConfig {
    let method_config = match method {
        MethodName::Midpoint => Method::Midpoint,
        MethodName::Step => Method::Step { tail: options.tail },
        MethodName::Spline => Method::Spline,
        MethodName::Subdivide => Method::Subdivide {
            tail: options.tail,
            params: subdivision_params(options),
        },
        MethodName::Parametric => Method::Parametric {
            families: if options.families.is_empty() {
                Family::ALL.to_vec()
            } else {
                options.families.clone()
            },
            choice: choice(options),
        },
    };
    let matched = options.mean_match && method != MethodName::Parametric;
    EstimateConfig {
        method: method_config,
        mean_match: matched,
        mean: if matched { options.mean } else { None },
    }
}

pub fn check_positive(flag: &str, value: Option<f64>) -> ConfigResult<()> {
    match value {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(format!("{flag} must be positive, got {v}")),
        _ => Ok(()),
    }
}

pub fn check_threads(threads: Option<usize>) -> ConfigResult<()> {
    if threads == Some(0) {
        return Err("--threads must be at least 1".into());
    }
    Ok(())
}
