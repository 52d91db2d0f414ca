//! `[experiment.<id>]` tables mapped onto the experiment parameter blocks.

use mhd_verify::experiments::{
    AbsorbingParams, BrezisGallouetParams, CalibrateParams, DependenceParams, DeterminismParams,
    EigenParams, EnergyParams, GronwallParams, HeatParams, IdentityParams, MmsParams, PicardParams,
    TailParams,
};
use mhd_verify::ExperimentParams;
use toml::Table;

use crate::config::Violation;
use crate::value::TomlValue;

pub trait ParamBlock {
    const KEYS: &'static [&'static str];
    fn apply(&mut self, table: &Table, prefix: &str, errs: &mut Vec<Violation>);
    fn to_table(&self) -> Table;
}

macro_rules! param_block {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl ParamBlock for $ty {
            const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            fn apply(&mut self, table: &Table, prefix: &str, errs: &mut Vec<Violation>) {
                $(
                    if let Some(v) = table.get(stringify!($field)) {
                        match TomlValue::from_toml(v) {
                            Ok(x) => self.$field = x,
                            Err(e) => errs.push(Violation::new(format!("{prefix}.{}", stringify!($field)), e)),
                        }
                    }
                )*
            }

            fn to_table(&self) -> Table {
                let mut t = Table::new();
                $( t.insert(stringify!($field).to_owned(), self.$field.to_toml()); )*
                t
            }
        }
    };
}

param_block!(IdentityParams {
    resolutions,
    min_ratio
});
param_block!(MmsParams {
    spatial_resolutions,
    spatial_dt,
    spatial_horizon,
    temporal_nx,
    temporal_dts,
    temporal_horizon,
    min_spatial_order,
    min_temporal_order,
});
param_block!(EnergyParams {
    nx,
    dts,
    horizon,
    scenario,
    identity_tol,
    first_order_slack
});
param_block!(HeatParams {
    nx,
    dt,
    horizon,
    rel_tol
});
param_block!(GronwallParams {
    nx,
    dt,
    horizon,
    scenarios
});
param_block!(DependenceParams {
    nx,
    dt,
    horizon,
    scenario,
    eps,
    factor
});
param_block!(PicardParams {
    nx,
    dts,
    horizon,
    scenario,
    threshold_dt,
    slack
});
param_block!(AbsorbingParams {
    nx,
    dt,
    scenario,
    diam_factor,
    probe_horizon,
    extra_time,
    max_horizon,
    decay_horizon,
});
param_block!(TailParams {
    nx,
    dt,
    sample_time,
    ns,
    min_reduction
});
param_block!(EigenParams {
    resolutions,
    modes,
    samples,
    seed,
    max_factor
});
param_block!(BrezisGallouetParams {
    resolutions,
    fields,
    bandwidth,
    seed,
    rel_tol
});
param_block!(DeterminismParams {
    scenario,
    nx,
    dt,
    horizon
});
param_block!(CalibrateParams {
    nx,
    dt,
    horizon,
    reference,
    absorbing_reference,
    absorbing_horizon
});

/// Table names under `[experiment]`, the experiment ids plus `calibrate`.
pub const TABLES: [&str; 13] = [
    "identities",
    "mms",
    "energy_law",
    "heat_decay",
    "gronwall",
    "continuous_dependence",
    "picard",
    "absorbing",
    "tail",
    "eigen",
    "brezis_gallouet",
    "determinism",
    "calibrate",
];

pub fn keys(table: &str) -> Option<&'static [&'static str]> {
    Some(match table {
        "identities" => IdentityParams::KEYS,
        "mms" => MmsParams::KEYS,
        "energy_law" => EnergyParams::KEYS,
        "heat_decay" => HeatParams::KEYS,
        "gronwall" => GronwallParams::KEYS,
        "continuous_dependence" => DependenceParams::KEYS,
        "picard" => PicardParams::KEYS,
        "absorbing" => AbsorbingParams::KEYS,
        "tail" => TailParams::KEYS,
        "eigen" => EigenParams::KEYS,
        "brezis_gallouet" => BrezisGallouetParams::KEYS,
        "determinism" => DeterminismParams::KEYS,
        "calibrate" => CalibrateParams::KEYS,
        _ => return None,
    })
}

pub fn apply(
    p: &mut ExperimentParams,
    table: &str,
    t: &Table,
    prefix: &str,
    errs: &mut Vec<Violation>,
) {
    match table {
        "identities" => p.identities.apply(t, prefix, errs),
        "mms" => p.mms.apply(t, prefix, errs),
        "energy_law" => p.energy_law.apply(t, prefix, errs),
        "heat_decay" => p.heat_decay.apply(t, prefix, errs),
        "gronwall" => p.gronwall.apply(t, prefix, errs),
        "continuous_dependence" => p.dependence.apply(t, prefix, errs),
        "picard" => p.picard.apply(t, prefix, errs),
        "absorbing" => p.absorbing.apply(t, prefix, errs),
        "tail" => p.tail.apply(t, prefix, errs),
        "eigen" => p.eigen.apply(t, prefix, errs),
        "brezis_gallouet" => p.brezis_gallouet.apply(t, prefix, errs),
        "determinism" => p.determinism.apply(t, prefix, errs),
        "calibrate" => p.calibrate.apply(t, prefix, errs),
        _ => {}
    }
}

pub fn to_tables(p: &ExperimentParams) -> Vec<(&'static str, Table)> {
    vec![
        ("identities", p.identities.to_table()),
        ("mms", p.mms.to_table()),
        ("energy_law", p.energy_law.to_table()),
        ("heat_decay", p.heat_decay.to_table()),
        ("gronwall", p.gronwall.to_table()),
        ("continuous_dependence", p.dependence.to_table()),
        ("picard", p.picard.to_table()),
        ("absorbing", p.absorbing.to_table()),
        ("tail", p.tail.to_table()),
        ("eigen", p.eigen.to_table()),
        ("brezis_gallouet", p.brezis_gallouet.to_table()),
        ("determinism", p.determinism.to_table()),
        ("calibrate", p.calibrate.to_table()),
    ]
}

/// Scenario names referenced by the parameter blocks, with their config keys.
pub fn scenario_refs(p: &ExperimentParams) -> Vec<(String, &str)> {
    let mut out = vec![
        (
            "experiment.energy_law.scenario".to_owned(),
            p.energy_law.scenario.as_str(),
        ),
        (
            "experiment.continuous_dependence.scenario".to_owned(),
            p.dependence.scenario.as_str(),
        ),
        (
            "experiment.picard.scenario".to_owned(),
            p.picard.scenario.as_str(),
        ),
        (
            "experiment.absorbing.scenario".to_owned(),
            p.absorbing.scenario.as_str(),
        ),
        (
            "experiment.determinism.scenario".to_owned(),
            p.determinism.scenario.as_str(),
        ),
        (
            "experiment.calibrate.reference".to_owned(),
            p.calibrate.reference.as_str(),
        ),
        (
            "experiment.calibrate.absorbing_reference".to_owned(),
            p.calibrate.absorbing_reference.as_str(),
        ),
    ];
    for (k, s) in p.gronwall.scenarios.iter().enumerate() {
        out.push((format!("experiment.gronwall.scenarios[{k}]"), s.as_str()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_table_has_keys_and_round_trips() {
        let p = ExperimentParams::default();
        for (name, table) in to_tables(&p) {
            assert!(TABLES.contains(&name));
            let keys = keys(name).unwrap();
            assert_eq!(table.len(), keys.len(), "{name}");
            let mut q = ExperimentParams::default();
            let mut errs = Vec::new();
            apply(&mut q, name, &table, name, &mut errs);
            assert!(errs.is_empty());
            assert_eq!(p, q);
        }
    }
}
