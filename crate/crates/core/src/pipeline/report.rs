use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExtensionScorecard, PipelineError, RunConfig};
use crate::graph::Digraph;
use crate::linalg::CMatrix;
use crate::metrics::structural_report;
use crate::spectral::{compare_bases, eigendecompose_real};

/// Selections beyond this many are left out of the pairwise basis comparisons.
const MAX_BASIS_DIFF: usize = 4;

const BASE_LABEL: &str = "base";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportManifest {
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write<R, I>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), PipelineError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(PipelineError::io(&path))?;
        self.files.push(path);
        Ok(())
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn eigenvectors(base: &Digraph, card: &ExtensionScorecard, allow_multi: bool) -> Result<CMatrix, PipelineError> {
    let extended = base.with_added_edges(&card.provenance.added, allow_multi)?;
    Ok(eigendecompose_real(&extended.adjacency())?.vectors)
}

/// Write the figure CSV files for `selection` (compared against `base`) and the
/// distributions over `population`. Returns the paths written, in order.
pub fn emit_reports(
    selection: &[ExtensionScorecard],
    population: &[ExtensionScorecard],
    base: &Digraph,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<ReportManifest, PipelineError> {
    if selection.is_empty() {
        return Err(PipelineError::Invalid("nothing selected to report on".into()));
    }
    fs::create_dir_all(out_dir).map_err(PipelineError::io(out_dir))?;
    let base_report = structural_report(base, None, &config.motifs, &config.pagerank)?;
    let mut w = Writer {
        dir: out_dir,
        files: Vec::new(),
    };

    let scored: Vec<&ExtensionScorecard> = population.iter().filter(|c| c.is_admissible()).collect();
    w.write(
        "dist_indices.csv",
        &["candidate_id", "delta", "Delta", "cond"],
        scored.iter().filter_map(|c| {
            let i = c.indices?;
            Some(vec![
                c.candidate_id.clone(),
                i.delta.to_string(),
                i.big_delta.to_string(),
                opt(c.cond),
            ])
        }),
    )?;
    w.write(
        "dist_tau.csv",
        &["candidate_id", "tau"],
        scored
            .iter()
            .filter_map(|c| Some(vec![c.candidate_id.clone(), c.tau?.to_string()])),
    )?;

    // Base first, then the selection; scorecards without structure are skipped.
    let graphs: Vec<(&str, &crate::metrics::StructuralReport)> = std::iter::once((BASE_LABEL, &base_report))
        .chain(
            selection
                .iter()
                .filter_map(|c| c.structural.as_ref().map(|s| (c.candidate_id.as_str(), s))),
        )
        .collect();
    w.write(
        "pagerank_compare.csv",
        &["graph", "node", "pagerank"],
        graphs.iter().flat_map(|(label, s)| {
            s.pagerank
                .iter()
                .enumerate()
                .map(move |(v, p)| vec![label.to_string(), v.to_string(), p.to_string()])
        }),
    )?;
    w.write(
        "motif.csv",
        &["graph", "motif_3cycle", "motif_ffl"],
        graphs.iter().map(|(label, s)| {
            vec![
                label.to_string(),
                opt(s.motif_densities.get("3cycle")),
                opt(s.motif_densities.get("ffl")),
            ]
        }),
    )?;
    w.write(
        "coreperiph.csv",
        &["graph", "core", "periphery"],
        graphs.iter().map(|(label, s)| {
            vec![
                label.to_string(),
                s.core_count.to_string(),
                s.periphery_count.to_string(),
            ]
        }),
    )?;
    w.write(
        "clustering.csv",
        &["graph", "node", "local_clustering"],
        graphs.iter().flat_map(|(label, s)| {
            s.local_clustering
                .iter()
                .enumerate()
                .map(move |(v, c)| vec![label.to_string(), v.to_string(), c.to_string()])
        }),
    )?;
    w.write(
        "stability.csv",
        &["candidate_id", "stab_left", "stab_right", "cond"],
        selection.iter().map(|c| {
            vec![
                c.candidate_id.clone(),
                opt(c.stability.map(|s| s[0])),
                opt(c.stability.map(|s| s[1])),
                opt(c.cond),
            ]
        }),
    )?;

    let head = &selection[..selection.len().min(MAX_BASIS_DIFF)];
    let bases = head
        .iter()
        .map(|c| eigenvectors(base, c, config.filter.allow_multi))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<(usize, usize)> = if bases.len() == 1 {
        vec![(0, 0)]
    } else {
        (0..bases.len())
            .flat_map(|i| (i + 1..bases.len()).map(move |j| (i, j)))
            .collect()
    };
    let n = base.n();
    let mut header = vec!["harmonic".to_string()];
    header.extend((0..n).map(|k| k.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    for (i, j) in pairs {
        let d = compare_bases(&bases[i], &bases[j])?;
        w.write(
            &format!("basis_diff_{i}_{j}.csv"),
            &header,
            d.row_iter().enumerate().map(|(r, row)| {
                std::iter::once(r.to_string())
                    .chain(row.iter().map(|x| x.to_string()))
                    .collect::<Vec<_>>()
            }),
        )?;
    }

    w.write(
        "system_signals.csv",
        &["candidate_id", "node", "re", "im"],
        selection.iter().flat_map(|c| {
            c.system_impulse.iter().flat_map(move |s| {
                s.values().iter().enumerate().map(move |(v, z)| {
                    vec![c.candidate_id.clone(), v.to_string(), z.re.to_string(), z.im.to_string()]
                })
            })
        }),
    )?;
    w.write(
        "added_edges.csv",
        &["candidate_id", "r", "c", "weight"],
        selection.iter().flat_map(|c| {
            c.provenance.added.iter().map(move |e| {
                vec![
                    c.candidate_id.clone(),
                    e.src.to_string(),
                    e.dst.to_string(),
                    e.weight.to_string(),
                ]
            })
        }),
    )?;
    Ok(ReportManifest { files: w.files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{apply_filters, run_enumeration, FilterSpec};

    fn lines(path: &Path) -> Vec<String> {
        fs::read_to_string(path).unwrap().lines().map(String::from).collect()
    }

    fn file<'a>(m: &'a ReportManifest, name: &str) -> &'a Path {
        m.files.iter().find(|p| p.ends_with(name)).unwrap()
    }

    #[test]
    fn single_selection_produces_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = Digraph::from_pairs(4, &[(0, 1), (1, 2), (2, 0), (0, 3)]).unwrap();
        let (_, cards) = run_enumeration(&g, &RunConfig::default(), dir.path()).unwrap();
        let out = apply_filters(&cards, &FilterSpec { tau_min: -1.0, ..FilterSpec::default() }).unwrap();
        assert_eq!(out.selected.len(), 1);
        let id = &out.selected[0].candidate_id;
        let m = emit_reports(&out.selected, &cards, &g, &RunConfig::default(), dir.path()).unwrap();
        let names: Vec<String> = m
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        for want in [
            "dist_indices.csv",
            "dist_tau.csv",
            "pagerank_compare.csv",
            "motif.csv",
            "coreperiph.csv",
            "clustering.csv",
            "stability.csv",
            "basis_diff_0_0.csv",
            "system_signals.csv",
            "added_edges.csv",
        ] {
            assert!(names.iter().any(|n| n == want), "missing {want}");
        }
        assert_eq!(lines(file(&m, "coreperiph.csv")).len(), 3);
        assert_eq!(lines(file(&m, "stability.csv")).len(), 2);
        assert_eq!(lines(file(&m, "added_edges.csv"))[1], format!("{id},3,1,1"));
        assert_eq!(lines(file(&m, "system_signals.csv")).len(), 1 + 4);
        // A basis compared with itself differs by zero on the diagonal.
        let diag = lines(file(&m, "basis_diff_0_0.csv"));
        assert_eq!(diag.len(), 5);
        assert_eq!(diag[0], "harmonic,0,1,2,3");
        for (k, row) in diag[1..].iter().enumerate() {
            let v: f64 = row.split(',').nth(k + 1).unwrap().parse().unwrap();
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn empty_selection_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Digraph::line(3).unwrap();
        assert!(emit_reports(&[], &[], &g, &RunConfig::default(), dir.path()).is_err());
    }
}
