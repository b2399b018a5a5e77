use serde::Serialize;

use crate::agents::{AAAgentModel, AgentIndex};
use crate::argumentation::ArgumentId;
use crate::error::{Error, Result};

/// An agent's highest-valued primary arguments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InspectionReport {
    pub agent: AgentIndex,
    pub entries: Vec<(ArgumentId, i64)>,
}

pub fn inspect_top_k(agent: &AAAgentModel, k: usize) -> Result<InspectionReport> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut entries = agent.ranked_primaries();
    entries.truncate(k);
    Ok(InspectionReport {
        agent: agent.self_index(),
        entries,
    })
}

/// One column per agent, one row per rank.
pub fn render_table(reports: &[InspectionReport]) -> String {
    let columns: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            std::iter::once(format!("Agent {}", r.agent.get() + 1))
                .chain(r.entries.iter().map(|(id, v)| format!("{id} ({v})")))
                .collect()
        })
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .map(|c| c.iter().map(String::len).max().unwrap_or(0))
        .collect();
    let depth = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    for row in 0..depth {
        let rank = if row == 0 {
            "Rank".to_string()
        } else {
            row.to_string()
        };
        let mut line = format!("{rank:<4}");
        for (col, w) in columns.iter().zip(&widths) {
            let cell = col.get(row).map(String::as_str).unwrap_or("");
            line.push_str(&format!(" | {cell:<w$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
