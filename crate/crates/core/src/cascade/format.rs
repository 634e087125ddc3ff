//! Cascade text format, extending the FSA format with per-component
//! sections and explicit upstream-state columns:
//!
//! ```text
//! alphabet: s t
//! component 0:
//! states: u w
//! s: u u
//! t: w w
//! component 1:
//! states: b0 b1
//! s | u: b1 b0
//! s | w: b0 b1
//! t | u: b0 b1
//! t | w: b1 b0
//! cover: (u,b0) -> m0
//! ```
//!
//! Component 0 rows read like plain FSA rows. Deeper components name the
//! upstream states between `|` and `:`; targets line up with the component's
//! own `states:` line. Optional `cover:` lines carry a covering map from
//! flat joint states.

use crate::automata::format::strip_comment;

use super::{Cascade, CascadeError, CoveringMap};

/// A parsed cascade file: the cascade plus any embedded covering map.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeFile {
    pub cascade: Cascade,
    pub cover: Option<CoveringMap>,
}

struct RawComponent {
    states: Vec<String>,
    /// (symbol label, upstream labels, target labels, line number)
    rows: Vec<(String, Vec<String>, Vec<String>, usize)>,
}

pub fn parse_cascade(text: &str) -> Result<CascadeFile, CascadeError> {
    let mut alphabet: Option<Vec<String>> = None;
    let mut components: Vec<RawComponent> = Vec::new();
    let mut cover_entries: Vec<(String, String)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CascadeError::Format(format!("line {}: {msg}", lineno + 1));

        if let Some(rest) = line.strip_prefix("cover:") {
            let (from, to) = rest
                .split_once("->")
                .ok_or_else(|| err("cover line needs 'from -> to'".into()))?;
            cover_entries.push((from.trim().to_string(), to.trim().to_string()));
            continue;
        }
        if let Some(rest) = line.strip_prefix("alphabet:") {
            if alphabet
                .replace(rest.split_whitespace().map(str::to_string).collect())
                .is_some()
            {
                return Err(err("duplicate alphabet line".into()));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("component") {
            let rest = rest.trim().trim_end_matches(':');
            let index: usize = rest
                .parse()
                .map_err(|_| err(format!("bad component index '{rest}'")))?;
            if index != components.len() {
                return Err(err(format!(
                    "component {index} out of order, expected component {}",
                    components.len()
                )));
            }
            components.push(RawComponent { states: Vec::new(), rows: Vec::new() });
            continue;
        }
        if let Some(rest) = line.strip_prefix("states:") {
            let comp = components
                .last_mut()
                .ok_or_else(|| err("states line before any component header".into()))?;
            if !comp.states.is_empty() {
                return Err(err("duplicate states line in component".into()));
            }
            comp.states = rest.split_whitespace().map(str::to_string).collect();
            continue;
        }
        // transition row: "sym: t t" or "sym | up ...: t t"
        let (head, targets) = line
            .split_once(':')
            .ok_or_else(|| err(format!("expected 'name: ...', found '{line}'")))?;
        let comp = components
            .last_mut()
            .ok_or_else(|| err("transition row before any component header".into()))?;
        let (symbol, upstream) = match head.split_once('|') {
            Some((sym, ups)) => (
                sym.trim().to_string(),
                ups.split_whitespace().map(str::to_string).collect(),
            ),
            None => (head.trim().to_string(), Vec::new()),
        };
        let targets = targets.split_whitespace().map(str::to_string).collect();
        comp.rows.push((symbol, upstream, targets, lineno + 1));
    }

    let alphabet = alphabet.ok_or_else(|| CascadeError::Format("missing alphabet line".into()))?;
    if alphabet.is_empty() {
        return Err(CascadeError::Format("alphabet line is empty".into()));
    }

    let mut state_sets: Vec<Vec<String>> = Vec::new();
    let mut tables: Vec<Vec<Vec<Vec<usize>>>> = Vec::new();
    for (k, comp) in components.iter().enumerate() {
        if comp.states.is_empty() {
            return Err(CascadeError::Format(format!("component {k} has no states line")));
        }
        let upstream_sizes: Vec<usize> = state_sets.iter().map(Vec::len).collect();
        let upstream_count: usize = upstream_sizes.iter().product();
        let mut table: Vec<Vec<Option<Vec<usize>>>> =
            vec![vec![None; upstream_count]; alphabet.len()];

        for (symbol, upstream, targets, lineno) in &comp.rows {
            let err = |msg: String| CascadeError::Format(format!("line {lineno}: {msg}"));
            let sym_idx = alphabet
                .iter()
                .position(|s| s == symbol)
                .ok_or_else(|| err(format!("unknown symbol '{symbol}'")))?;
            if upstream.len() != k {
                return Err(err(format!(
                    "component {k} rows need {k} upstream states, found {}",
                    upstream.len()
                )));
            }
            let mut up_idx = 0usize;
            for (j, label) in upstream.iter().enumerate() {
                let s = state_sets[j]
                    .iter()
                    .position(|x| x == label)
                    .ok_or_else(|| err(format!("unknown upstream state '{label}' for component {j}")))?;
                up_idx = up_idx * upstream_sizes[j] + s;
            }
            if targets.len() != comp.states.len() {
                return Err(err(format!(
                    "row lists {} targets for {} states",
                    targets.len(),
                    comp.states.len()
                )));
            }
            let row = targets
                .iter()
                .map(|t| {
                    comp.states
                        .iter()
                        .position(|s| s == t)
                        .ok_or_else(|| err(format!("unknown target state '{t}'")))
                })
                .collect::<Result<Vec<usize>, _>>()?;
            if table[sym_idx][up_idx].replace(row).is_some() {
                return Err(err(format!("duplicate row for symbol '{symbol}'")));
            }
        }

        let filled = table
            .into_iter()
            .enumerate()
            .map(|(sym_idx, rows)| {
                rows.into_iter()
                    .enumerate()
                    .map(|(up, row)| {
                        row.ok_or_else(|| {
                            CascadeError::Format(format!(
                                "component {k}: missing row for symbol '{}' upstream #{up}",
                                alphabet[sym_idx]
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        tables.push(filled);
        state_sets.push(comp.states.clone());
    }

    let cascade = Cascade::new(alphabet, state_sets, tables)?;
    let cover = if cover_entries.is_empty() {
        None
    } else {
        Some(CoveringMap::new(cover_entries)?)
    };
    Ok(CascadeFile { cascade, cover })
}

pub fn serialize_cascade(file: &CascadeFile) -> String {
    let c = &file.cascade;
    let mut out = String::new();
    out.push_str(&format!("alphabet: {}\n", c.alphabet().join(" ")));
    for (k, comp) in c.components().iter().enumerate() {
        out.push_str(&format!("component {k}:\n"));
        out.push_str(&format!("states: {}\n", comp.states().join(" ")));
        let upstream_labels = upstream_combos(c, k);
        for (sym_idx, symbol) in c.alphabet().iter().enumerate() {
            for (up_idx, ups) in upstream_labels.iter().enumerate() {
                let row = &comp.table[sym_idx][up_idx];
                let targets: Vec<&str> = row.iter().map(|&q| comp.states()[q].as_str()).collect();
                if ups.is_empty() {
                    out.push_str(&format!("{symbol}: {}\n", targets.join(" ")));
                } else {
                    out.push_str(&format!("{symbol} | {}: {}\n", ups.join(" "), targets.join(" ")));
                }
            }
        }
    }
    if let Some(cover) = &file.cover {
        for (from, to) in cover.entries() {
            out.push_str(&format!("cover: {from} -> {to}\n"));
        }
    }
    out
}

fn upstream_combos(c: &Cascade, k: usize) -> Vec<Vec<String>> {
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for comp in &c.components()[..k] {
        let mut next = Vec::with_capacity(combos.len() * comp.n_states());
        for combo in &combos {
            for s in comp.states() {
                let mut c2 = combo.clone();
                c2.push(s.clone());
                next.push(c2);
            }
        }
        combos = next;
    }
    combos
}
