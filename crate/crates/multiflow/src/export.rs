//! Text and binary exports of graphs, cell sets and sweep reports.
//!
//! Binary graph layout (`BOXMAP01`), all integers little-endian `u64` and
//! reals as `f64` bit patterns in the same byte order:
//!
//! ```text
//! magic "BOXMAP01" (8 bytes)
//! dim, subdivisions[dim], domain lo/hi per axis (f64 pairs)
//! tau (f64), lambda lo (f64), lambda hi (f64)
//! cell count N
//! N times: exit flag (0 or 1), target count m, m target ids
//! ```

use std::fmt::Write as _;

use multiflow_core::continuation::{DecompositionStatus, SweepReport};
use multiflow_core::dynamics::box_hausdorff;
use multiflow_core::{BoxMapGraph, BoxSet, Grid, Interval, IntervalVector, Params};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Format(String),
}

fn bad<T>(m: impl Into<String>) -> Result<T, ExportError> {
    Err(ExportError::Format(m.into()))
}

/// Edge list: `# cells N`, `# tau t`, `# exit ids...`, then `src dst` lines.
pub fn edge_list(g: &BoxMapGraph) -> String {
    let mut out = String::new();
    let n = g.grid().cell_count();
    writeln!(out, "# cells {n}").unwrap();
    writeln!(out, "# tau {:?}", g.tau()).unwrap();
    let exits: Vec<String> = g.flagged_cells().iter().map(|c| c.to_string()).collect();
    if exits.is_empty() {
        writeln!(out, "# exit").unwrap();
    } else {
        writeln!(out, "# exit {}", exits.join(" ")).unwrap();
    }
    for (a, b) in g.digraph().edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

/// Contents of an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub cells: usize,
    pub tau: f64,
    pub exits: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList, ExportError> {
    let mut cells = None;
    let mut tau = None;
    let mut exits = Vec::new();
    let mut edges = Vec::new();
    let num = |s: &str| s.parse::<usize>().or_else(|_| bad(format!("not a cell id: '{s}'")));
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(h) = line.strip_prefix('#') {
            let mut it = h.split_whitespace();
            match it.next() {
                Some("cells") => cells = Some(num(it.next().unwrap_or(""))?),
                Some("tau") => {
                    tau = Some(it.next().and_then(|t| t.parse().ok()).ok_or_else(|| ExportError::Format("bad tau".into()))?)
                }
                Some("exit") => exits = it.map(num).collect::<Result<_, _>>()?,
                _ => {}
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return bad(format!("expected 'src dst', got '{line}'"));
        };
        edges.push((num(a)?, num(b)?));
    }
    let cells = cells.ok_or_else(|| ExportError::Format("missing '# cells' header".into()))?;
    if edges.iter().any(|&(a, b)| a >= cells || b >= cells) || exits.iter().any(|&c| c >= cells) {
        return bad("cell id out of range");
    }
    Ok(EdgeList {
        cells,
        tau: tau.ok_or_else(|| ExportError::Format("missing '# tau' header".into()))?,
        exits,
        edges,
    })
}

const MAGIC: &[u8; 8] = b"BOXMAP01";

pub fn graph_to_bytes(g: &BoxMapGraph) -> Vec<u8> {
    let mut out = Vec::new();
    let u = |out: &mut Vec<u8>, v: u64| out.extend_from_slice(&v.to_le_bytes());
    let f = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_bits().to_le_bytes());
    out.extend_from_slice(MAGIC);
    let grid = g.grid();
    u(&mut out, grid.dim() as u64);
    for &s in grid.subdivisions() {
        u(&mut out, s as u64);
    }
    for c in grid.domain().iter() {
        f(&mut out, c.lo());
        f(&mut out, c.hi());
    }
    f(&mut out, g.tau());
    f(&mut out, g.params().lambda.lo());
    f(&mut out, g.params().lambda.hi());
    u(&mut out, grid.cell_count() as u64);
    for cell in 0..grid.cell_count() {
        u(&mut out, g.exited(cell) as u64);
        let t = g.targets(cell);
        u(&mut out, t.len() as u64);
        for &id in t {
            u(&mut out, id as u64);
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn word(&mut self) -> Result<[u8; 8], ExportError> {
        let end = self.at + 8;
        let w = self.bytes.get(self.at..end).ok_or_else(|| ExportError::Format("truncated graph file".into()))?;
        self.at = end;
        Ok(w.try_into().unwrap())
    }

    fn u(&mut self) -> Result<usize, ExportError> {
        let v = u64::from_le_bytes(self.word()?);
        usize::try_from(v).or_else(|_| bad("integer does not fit"))
    }

    fn f(&mut self) -> Result<f64, ExportError> {
        Ok(f64::from_bits(u64::from_le_bytes(self.word()?)))
    }
}

pub fn graph_from_bytes(bytes: &[u8]) -> Result<BoxMapGraph, ExportError> {
    if bytes.get(..8) != Some(MAGIC.as_slice()) {
        return bad("not a BOXMAP01 file");
    }
    let mut r = Reader { bytes, at: 8 };
    let dim = r.u()?;
    if dim == 0 || dim > 64 {
        return bad("implausible dimension");
    }
    let subs = (0..dim).map(|_| r.u()).collect::<Result<Vec<_>, _>>()?;
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for _ in 0..dim {
        lo.push(r.f()?);
        hi.push(r.f()?);
    }
    let domain = IntervalVector::from_bounds(&lo, &hi).ok_or_else(|| ExportError::Format("bad domain".into()))?;
    let grid = Grid::new(domain, subs).map_err(|e| ExportError::Format(e.to_string()))?;
    let tau = r.f()?;
    let lambda = Interval::new(r.f()?, r.f()?).ok_or_else(|| ExportError::Format("bad lambda".into()))?;
    let n = r.u()?;
    if n != grid.cell_count() {
        return bad("cell count does not match the grid");
    }
    let mut images = Vec::with_capacity(n);
    for _ in 0..n {
        let exit = match r.u()? {
            0 => false,
            1 => true,
            _ => return bad("exit flag must be 0 or 1"),
        };
        let m = r.u()?;
        if m > n {
            return bad("target list longer than the grid");
        }
        let ids = (0..m).map(|_| r.u()).collect::<Result<Vec<_>, _>>()?;
        if ids.iter().any(|&i| i >= n) || ids.windows(2).any(|w| w[0] >= w[1]) {
            return bad("targets must be sorted cell ids");
        }
        images.push((BoxSet::from_ids(n, ids), exit));
    }
    if r.at != bytes.len() {
        return bad("trailing bytes");
    }
    Ok(BoxMapGraph::from_images(grid, tau, Params { lambda }, images))
}

fn grid_header(grid: &Grid) -> String {
    let s: Vec<String> = grid.subdivisions().iter().map(|s| s.to_string()).collect();
    format!("# grid {}", s.join(" "))
}

/// `# grid <subdivisions>` followed by one cell id per line.
pub fn boxset_text(grid: &Grid, set: &BoxSet) -> String {
    let mut out = grid_header(grid);
    out.push('\n');
    for id in set.iter() {
        writeln!(out, "{id}").unwrap();
    }
    out
}

pub fn parse_boxset(text: &str, grid: &Grid) -> Result<BoxSet, ExportError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(grid_header(grid).as_str()) {
        return bad("grid header does not match");
    }
    let n = grid.cell_count();
    let ids = lines
        .map(|l| match l.parse::<usize>() {
            Ok(id) if id < n => Ok(id),
            _ => bad(format!("not a cell id: '{l}'")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoxSet::from_ids(n, ids))
}

/// Whitespace-separated columns: cell id, then lo and hi per axis.
pub fn boxset_table(grid: &Grid, set: &BoxSet) -> String {
    let mut out = String::from("cell");
    for axis in 1..=grid.dim() {
        write!(out, " lo{axis} hi{axis}").unwrap();
    }
    out.push('\n');
    for id in set.iter() {
        write!(out, "{id}").unwrap();
        for c in grid.cell_box(id).iter() {
            write!(out, " {:?} {:?}", c.lo(), c.hi()).unwrap();
        }
        out.push('\n');
    }
    out
}

fn flag(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "-",
    }
}

pub fn status_name(s: &DecompositionStatus) -> String {
    match s {
        DecompositionStatus::NotRun => "not-run".into(),
        DecompositionStatus::NotIsolated => "not-isolated".into(),
        DecompositionStatus::Decomposed(_) => "decomposed".into(),
        DecompositionStatus::ContinuedToEmpty => "continued-to-empty".into(),
        DecompositionStatus::Breakdown(e) => format!("breakdown: {e}"),
    }
}

/// Columnar sweep table, one row per record.
pub fn sweep_table(report: &SweepReport) -> String {
    let mut out = String::from("lambda_lo lambda_hi S A R C iso_N iso_NA iso_NR verified decomposition\n");
    for (i, r) in report.records.iter().enumerate() {
        let d = r.decomposition.decomposition();
        let size = |f: fn(&multiflow_core::ARDecomposition) -> &BoxSet| d.map_or("-".to_string(), |d| f(d).len().to_string());
        let status = match &r.decomposition {
            DecompositionStatus::Breakdown(_) => "breakdown".to_string(),
            s => status_name(s),
        };
        writeln!(
            out,
            "{:?} {:?} {} {} {} {} {} {} {} {} {}",
            r.lambda.lo(),
            r.lambda.hi(),
            r.invariant.len(),
            size(|d| &d.a),
            size(|d| &d.r),
            size(|d| &d.c),
            flag(Some(r.isolation.passed())),
            flag(r.isolation_a.as_ref().map(|c| c.passed())),
            flag(r.isolation_r.as_ref().map(|c| c.passed())),
            report.in_verified_run(i),
            status
        )
        .unwrap();
    }
    out
}

/// Structured text report: one block per record with certificates, set
/// sizes and the Hausdorff drift of `S` from the anchor.
pub fn sweep_text(grid: &Grid, report: &SweepReport) -> String {
    let mut out = String::new();
    let anchor = &report.records[report.anchor];
    match report.verified_interval() {
        Some(v) => writeln!(out, "verified lambda interval: [{:?}, {:?}]", v.lo(), v.hi()).unwrap(),
        None => writeln!(out, "verified lambda interval: none (anchor fails)").unwrap(),
    }
    for (i, r) in report.records.iter().enumerate() {
        writeln!(out).unwrap();
        writeln!(out, "[lambda {}]{}", r.lambda, if i == report.anchor { " anchor" } else { "" }).unwrap();
        writeln!(out, "  isolation N: {} (|Inv N| = {})", flag(Some(r.isolation.passed())), r.invariant.len()).unwrap();
        if let Some(c) = &r.isolation_a {
            writeln!(out, "  isolation N_A: {} (|Inv N_A| = {})", flag(Some(c.passed())), c.invariant.len()).unwrap();
        }
        if let Some(c) = &r.isolation_r {
            writeln!(out, "  isolation N_R: {} (|Inv N_R| = {})", flag(Some(c.passed())), c.invariant.len()).unwrap();
        }
        writeln!(out, "  in verified run: {}", report.in_verified_run(i)).unwrap();
        writeln!(out, "  decomposition: {}", status_name(&r.decomposition)).unwrap();
        if let Some(d) = r.decomposition.decomposition() {
            writeln!(out, "  |A| = {}, |R| = {}, |C| = {}, k* = {}", d.a.len(), d.r.len(), d.c.len(), d.k_star).unwrap();
        }
        let drift = match box_hausdorff(grid, &r.invariant, &anchor.invariant) {
            Ok(h) => format!("{h:?}"),
            Err(_) => "n/a (empty set)".into(),
        };
        writeln!(out, "  hausdorff(S, S_anchor): {drift}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use multiflow_core::Digraph;

    fn sample() -> BoxMapGraph {
        let grid = Grid::new(IntervalVector::from_bounds(&[0.0, -1.0], &[1.0, 1.0]).unwrap(), vec![2, 2]).unwrap();
        let g = Digraph::from_adjacency(vec![vec![1, 2], vec![], vec![2], vec![0, 3]], vec![false, true, false, true]);
        BoxMapGraph::from_digraph(grid, 0.125, Params::at(0.5).unwrap(), g)
    }

    #[test]
    fn edge_list_format() {
        let text = edge_list(&sample());
        assert_eq!(text, "# cells 4\n# tau 0.125\n# exit 1 3\n0 1\n0 2\n2 2\n3 0\n3 3\n");
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back.exits, vec![1, 3]);
        assert_eq!(back.edges.len(), 5);
        assert!(parse_edge_list("# cells 2\n# tau 1\n0 5\n").is_err());
    }

    #[test]
    fn binary_round_trip() {
        let g = sample();
        let bytes = graph_to_bytes(&g);
        assert_eq!(&bytes[..8], b"BOXMAP01");
        assert_eq!(graph_from_bytes(&bytes).unwrap(), g);
        assert!(graph_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        assert!(graph_from_bytes(&corrupt).is_err());
    }

    #[test]
    fn boxset_round_trip_and_table() {
        let g = sample();
        let set = BoxSet::from_ids(4, vec![0, 3]);
        let text = boxset_text(g.grid(), &set);
        assert_eq!(text, "# grid 2 2\n0\n3\n");
        assert_eq!(parse_boxset(&text, g.grid()).unwrap(), set);
        let table = boxset_table(g.grid(), &set);
        assert_eq!(table, "cell lo1 hi1 lo2 hi2\n0 0.0 0.5 -1.0 0.0\n3 0.5 1.0 0.0 1.0\n");
    }
}
