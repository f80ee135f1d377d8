use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use frp_core::market::FrpMode;
use frp_core::rtuc::{ModeSummary, Pairwise, ScenarioRow};
use serde::Deserialize;

use crate::commands::{write_file, AGGREGATE, INTERVAL_MAX_LMP, SCENARIO_RESULTS};
use crate::error::CliError;

pub const REQUIRED: [&str; 3] = [AGGREGATE, SCENARIO_RESULTS, INTERVAL_MAX_LMP];

#[derive(Deserialize)]
struct Base {
    spike_threshold: f64,
    summaries: Vec<ModeSummary>,
}

#[derive(Deserialize)]
struct Aggregate {
    scenarios: usize,
    base: Base,
}

#[derive(Deserialize)]
struct ResultRow {
    mode: FrpMode,
    scenario: u32,
    violation_mwh: f64,
    cost_without_penalty: f64,
    cost_with_penalty: f64,
    increased_fs_commitments: u32,
    price_spikes: u32,
}

fn parse_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Input(frp_core::error::InputError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Per-mode scenario rows in file order, with the interval maxima attached.
fn read_rows(dir: &Path) -> Result<BTreeMap<FrpMode, Vec<ScenarioRow>>, CliError> {
    let path = dir.join(SCENARIO_RESULTS);
    let mut rows: BTreeMap<FrpMode, Vec<ScenarioRow>> = BTreeMap::new();
    let mut reader = csv::Reader::from_path(&path).map_err(|e| parse_err(&path, e))?;
    for r in reader.deserialize::<ResultRow>() {
        let r = r.map_err(|e| parse_err(&path, e))?;
        rows.entry(r.mode).or_default().push(ScenarioRow {
            scenario: r.scenario,
            violation_mwh: r.violation_mwh,
            cost_without_penalty: r.cost_without_penalty,
            cost_with_penalty: r.cost_with_penalty,
            increased_fs_commitments: r.increased_fs_commitments,
            price_spikes: r.price_spikes,
            max_lmp: Vec::new(),
        });
    }
    let path = dir.join(INTERVAL_MAX_LMP);
    let mut reader = csv::Reader::from_path(&path).map_err(|e| parse_err(&path, e))?;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(&path, e))?;
        let mode: FrpMode = record.get(0).unwrap_or_default().parse().map_err(|e| parse_err(&path, e))?;
        let scenario: u32 = record.get(1).unwrap_or_default().parse().map_err(|e| parse_err(&path, e))?;
        let values = record
            .iter()
            .skip(2)
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(&path, e))?;
        let row = rows
            .get_mut(&mode)
            .and_then(|rs| rs.iter_mut().find(|r| r.scenario == scenario))
            .ok_or_else(|| parse_err(&path, format!("{mode} scenario {scenario} has no result row")))?;
        row.max_lmp = values;
    }
    Ok(rows)
}

/// Pairwise comparisons recomputed from the per-scenario files.
pub fn pairwise_from_dir(dir: &Path, threshold: f64) -> Result<Vec<Pairwise>, CliError> {
    let rows = read_rows(dir)?;
    let mut out = Vec::new();
    for (a, rows_a) in &rows {
        for (b, rows_b) in &rows {
            if a != b {
                out.push(Pairwise::new(*a, rows_a, *b, rows_b, threshold));
            }
        }
    }
    Ok(out)
}

/// Writes `report.md` and the scatter series behind the violation plots.
pub fn report(dir: &Path) -> Result<String, CliError> {
    let missing: Vec<String> = REQUIRED
        .iter()
        .filter(|f| !dir.join(f).is_file())
        .map(|f| f.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::MissingArtifacts {
            dir: dir.to_path_buf(),
            files: missing,
        });
    }
    let path = dir.join(AGGREGATE);
    let text = fs::read_to_string(&path).map_err(|e| parse_err(&path, e))?;
    let aggregate: Aggregate = serde_json::from_str(&text).map_err(|e| parse_err(&path, e))?;
    let rows = read_rows(dir)?;
    let pairwise = pairwise_from_dir(dir, aggregate.base.spike_threshold)?;

    write_file(dir, "scatter_violation_cost.csv", |out| {
        writeln!(out, "mode,scenario,violation_mwh,cost_without_penalty,cost_with_penalty")?;
        for (mode, rs) in &rows {
            for r in rs {
                writeln!(
                    out,
                    "{mode},{},{},{},{}",
                    r.scenario, r.violation_mwh, r.cost_without_penalty, r.cost_with_penalty
                )?;
            }
        }
        Ok(())
    })?;
    write_file(dir, "scatter_violation_fs.csv", |out| {
        writeln!(out, "mode,scenario,violation_mwh,increased_fs_commitments")?;
        for (mode, rs) in &rows {
            for r in rs {
                writeln!(out, "{mode},{},{},{}", r.scenario, r.violation_mwh, r.increased_fs_commitments)?;
            }
        }
        Ok(())
    })?;

    let summary = render(&aggregate, &pairwise);
    write_file(dir, "report.md", |out| Ok(out.write_all(summary.as_bytes())?))?;
    Ok(summary)
}

fn render(aggregate: &Aggregate, pairwise: &[Pairwise]) -> String {
    let summaries = &aggregate.base.summaries;
    let mut s = String::new();
    let _ = writeln!(s, "# Validation summary\n\nScenarios: {}\n", aggregate.scenarios);

    let _ = writeln!(s, "## Scenarios with same or less value (b vs a)\n");
    let _ = writeln!(s, "| a | b | violation | cost w/o penalty | cost with penalty | FS commitments |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for p in pairwise {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            p.a,
            p.b,
            p.violation_same_or_less,
            p.cost_without_penalty_same_or_less,
            p.cost_with_penalty_same_or_less,
            p.fs_commitments_same_or_less
        );
    }

    let _ = writeln!(s, "\n## Day-ahead objective\n\n| mode | objective ($) |\n|---|---|");
    for m in summaries {
        let _ = writeln!(s, "| {} | {:.2} |", m.mode, m.da_objective);
    }

    let _ = writeln!(s, "\n## Violation (MWh)\n");
    let _ = writeln!(s, "| mode | average | std | sum | scenarios with violation | max |\n|---|---|---|---|---|---|");
    for m in summaries {
        let v = &m.violation_mwh;
        let _ = writeln!(
            s,
            "| {} | {:.4} | {:.4} | {:.4} | {} | {:.4} |",
            m.mode, v.average, v.std, v.sum, v.count, v.max
        );
    }

    let _ = writeln!(s, "\n## Increased FS 15-min commitments\n");
    let _ = writeln!(s, "| mode | average | sum | scenarios with increase | max |\n|---|---|---|---|---|");
    for m in summaries {
        let f = &m.increased_fs_commitments;
        let _ = writeln!(s, "| {} | {:.4} | {} | {} | {} |", m.mode, f.average, f.sum, f.count, f.max);
    }

    let _ = writeln!(s, "\n## Real-time cost ($)\n");
    let _ = writeln!(
        s,
        "| mode | average w/o penalty | std w/o penalty | max w/o penalty | average with penalty | std with penalty | max with penalty |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    for m in summaries {
        let (a, b) = (&m.cost_without_penalty, &m.cost_with_penalty);
        let _ = writeln!(
            s,
            "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} |",
            m.mode, a.average, a.std, a.max, b.average, b.std, b.max
        );
    }

    let _ = writeln!(
        s,
        "\n## Price spikes (max LMP >= {} $/MWh)\n",
        aggregate.base.spike_threshold
    );
    let _ = writeln!(s, "| mode | cases |\n|---|---|");
    for m in summaries {
        let _ = writeln!(s, "| {} | {} |", m.mode, m.price_spike_cases);
    }
    let _ = writeln!(s, "\n| a | b | only a | only b | both |\n|---|---|---|---|---|");
    for p in pairwise {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            p.a, p.b, p.spikes.only_a, p.spikes.only_b, p.spikes.both
        );
    }
    s
}
