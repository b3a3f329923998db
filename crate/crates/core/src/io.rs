//! File formats: dataset CSV, model files and benchmark reports.
//!
//! Dataset CSV: comma separated, UTF-8, one header row. Columns named
//! `rank_<label>` hold that label's rank position (1 = most preferred); every
//! other column is a numeric feature.
//!
//! Model file: tab separated text, one record per line.
//!
//! ```text
//! lrboost-model   1
//! method          boost
//! labels          A   B   C
//! features        2
//! spec            n_models=50 sample_ratio=1 max_depth=16 min_leaf=3 sampling=weighted
//! seed            7
//! members         2
//! member          nodes=3 alpha=1.2 beta=0.3 avg_loss=0.23
//! split           0   0.5 1   2
//! leaf            1   2   3
//! leaf            3   2   1
//! member          nodes=1 alpha=0.9 beta=0.4 avg_loss=0.29
//! leaf            2   1   3
//! end
//! ```
//!
//! Model and dataset files print floats in shortest round-trip form so they
//! reload bit-exactly; report files use 12 significant digits.

use std::fs;
use std::path::Path;

use crate::baselines::{Aggregator, BaggedEnsemble};
use crate::boosting::{BoostedEnsemble, IterationRecord, Sampling};
use crate::error::{Error, Result};
use crate::evaluation::{chi_square_critical_95, CVResult, EvalReport, Improvement};
use crate::model::{Method, MethodSpec, Model};
use crate::ranking::{validate_dataset, Dataset, LabelSet, RawRow, Ranking};
use crate::tree::{Node, RankingTree, TreeConfig};

pub const RANK_PREFIX: &str = "rank_";
pub const MODEL_MAGIC: &str = "lrboost-model";
pub const MODEL_VERSION: u32 = 1;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes via a temporary sibling file and a rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_error(row: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { row, col, msg: msg.into() }
}

struct Table {
    header: Vec<String>,
    /// (file row number, cells)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        Some(Ok(h)) => h.iter().map(str::to_string).collect(),
        Some(Err(e)) => return Err(parse_error(1, 0, e.to_string())),
        None => return Err(parse_error(1, 0, "empty file")),
    };
    let mut rows = Vec::new();
    for (k, rec) in records.enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| parse_error(row, 0, e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_error(
                row,
                rec.len().min(header.len()) + 1,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        rows.push((row, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn parse_number(cell: &str, row: usize, col: usize) -> Result<f64> {
    if cell.is_empty() {
        return Err(parse_error(row, col, "missing value"));
    }
    cell.parse::<f64>().map_err(|_| parse_error(row, col, format!("{cell:?} is not a number")))
}

/// Parses dataset CSV text.
pub fn parse_dataset_str(text: &str) -> Result<Dataset> {
    let table = read_table(text)?;
    let mut feature_cols = Vec::new();
    let mut rank_cols = Vec::new();
    let mut labels = Vec::new();
    for (c, name) in table.header.iter().enumerate() {
        match name.strip_prefix(RANK_PREFIX) {
            Some(label) => {
                if label.is_empty() {
                    return Err(parse_error(1, c + 1, "rank column without a label name"));
                }
                rank_cols.push(c);
                labels.push(label.to_string());
            }
            None => feature_cols.push(c),
        }
    }
    if rank_cols.len() < 2 {
        return Err(parse_error(1, 0, "need rank_<label> columns for at least 2 labels"));
    }
    let label_set = LabelSet::new(labels).map_err(|e| parse_error(1, 0, e.to_string()))?;
    let feature_names = feature_cols.iter().map(|&c| table.header[c].clone()).collect();

    let mut raw = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let features =
            feature_cols.iter().map(|&c| parse_number(&cells[c], *row, c + 1)).collect::<Result<_>>()?;
        let ranks = rank_cols.iter().map(|&c| parse_number(&cells[c], *row, c + 1)).collect::<Result<_>>()?;
        raw.push(RawRow { row: *row, features, ranks });
    }
    validate_dataset(&raw, label_set, feature_names)
}

pub fn parse_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset_str(&read_text(path)?)
}

/// Feature columns only (any `rank_` columns are ignored), for prediction.
pub fn parse_features_str(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let table = read_table(text)?;
    let cols: Vec<usize> =
        (0..table.header.len()).filter(|&c| !table.header[c].starts_with(RANK_PREFIX)).collect();
    let names = cols.iter().map(|&c| table.header[c].clone()).collect();
    let mut rows = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let x: Vec<f64> = cols.iter().map(|&c| parse_number(&cells[c], *row, c + 1)).collect::<Result<_>>()?;
        if let Some(c) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: *row, col: cols[c] + 1 });
        }
        rows.push(x);
    }
    Ok((names, rows))
}

fn csv_bytes<F>(fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    fill(&mut w).map_err(|e| Error::InvalidConfig(format!("csv output: {e}")))?;
    w.into_inner().map_err(|e| Error::InvalidConfig(format!("csv output: {e}")))
}

/// Inverse of [`parse_dataset_str`].
pub fn write_dataset(data: &Dataset) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        let header = data
            .feature_names()
            .iter()
            .cloned()
            .chain(data.label_set().names().iter().map(|l| format!("{RANK_PREFIX}{l}")));
        w.write_record(header)?;
        for inst in data.instances() {
            let row = inst
                .features
                .iter()
                .map(|v| v.to_string())
                .chain(inst.target.ranks().iter().map(|r| r.to_string()));
            w.write_record(row)?;
        }
        Ok(())
    })
}

/// Predicted rankings as `rank_<label>` columns, one row per input.
pub fn write_predictions(labels: &LabelSet, predictions: &[Ranking]) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(labels.names().iter().map(|l| format!("{RANK_PREFIX}{l}")))?;
        for p in predictions {
            w.write_record(p.ranks().iter().map(|r| r.to_string()))?;
        }
        Ok(())
    })
}

/// One CV result as a header plus a single row.
pub fn write_cv_result(result: &CVResult) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        let folds = (1..=result.fold_scores.len()).map(|f| format!("fold_{f}"));
        w.write_record(["method", "dataset", "n_models", "mean_kt"].map(String::from).into_iter().chain(folds))?;
        let values = [
            result.method.name().to_string(),
            result.dataset.clone(),
            result.n_models.to_string(),
            fmt12(result.mean_kt),
        ];
        w.write_record(values.into_iter().chain(result.fold_scores.iter().map(|s| fmt12(*s))))
    })
}

/// Writes `results.csv`, `improvements.csv`, `ranks.csv`, `friedman.txt` and
/// `size_curve.csv` into `dir`.
pub fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let results = csv_bytes(|w| {
        w.write_record(["method", "dataset", "fold", "kt"])?;
        for r in &report.results {
            for (f, kt) in r.fold_scores.iter().enumerate() {
                w.write_record([r.method.name(), &r.dataset, &(f + 1).to_string(), &fmt12(*kt)])?;
            }
        }
        Ok(())
    })?;
    atomic_write(&dir.join("results.csv"), &results)?;

    let improvements = csv_bytes(|w| {
        w.write_record(["method", "dataset", "improvement_pct"])?;
        for row in &report.improvements {
            let value = match row.value {
                Improvement::Percent(p) => fmt12(p),
                Improvement::AbsoluteDelta(d) => format!("delta={}", fmt12(d)),
            };
            w.write_record([row.method.name(), &row.dataset, &value])?;
        }
        Ok(())
    })?;
    atomic_write(&dir.join("improvements.csv"), &improvements)?;

    let ranks = csv_bytes(|w| {
        w.write_record(["dataset", "method", "rank"])?;
        for row in &report.rank_table {
            w.write_record([&row.dataset, row.method.name(), &fmt12(row.rank)])?;
        }
        Ok(())
    })?;
    atomic_write(&dir.join("ranks.csv"), &ranks)?;

    atomic_write(&dir.join("friedman.txt"), friedman_text(report).as_bytes())?;

    let curve = csv_bytes(|w| {
        w.write_record(["method", "n_models", "mean_kt"])?;
        for p in &report.size_curve {
            w.write_record([p.method.name(), &p.n_models.to_string(), &fmt12(p.mean_kt)])?;
        }
        Ok(())
    })?;
    atomic_write(&dir.join("size_curve.csv"), &curve)
}

fn friedman_text(report: &EvalReport) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut datasets: Vec<&str> = Vec::new();
    for r in &report.results {
        if !methods.contains(&r.method.name()) {
            methods.push(r.method.name());
        }
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
    }
    let mut out = String::from("test: friedman aligned ranks\n");
    out += &format!("datasets: {}\n", datasets.len());
    out += &format!("methods: {}\n", methods.join(","));
    match &report.friedman {
        Ok(f) => {
            out += &format!("statistic: {}\n", fmt12(f.statistic));
            out += &format!("df: {}\n", f.df);
            match chi_square_critical_95(f.df) {
                Some(c) => {
                    out += &format!("critical_value_95: {}\n", fmt12(c));
                    let verdict = if f.statistic > c { "yes" } else { "no" };
                    out += &format!("reject_null_at_95: {verdict}\n");
                }
                None => out += "critical_value_95: unavailable\n",
            }
        }
        Err(reason) => out += &format!("statistic: not computed ({reason})\n"),
    }
    out
}

/// Everything stored in a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub spec: MethodSpec,
    pub seed: u64,
    pub model: Model,
}

fn check_field(s: &str) -> Result<&str> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidConfig(format!("{s:?} cannot be stored in a model file")));
    }
    Ok(s)
}

fn write_tree(out: &mut String, tree: &RankingTree) {
    for node in tree.nodes() {
        match node {
            Node::Leaf { consensus } => {
                out.push_str("leaf");
                for r in consensus.ranks() {
                    out.push_str(&format!("\t{r}"));
                }
                out.push('\n');
            }
            Node::Split { feature, threshold, left, right } => {
                out.push_str(&format!("split\t{feature}\t{threshold}\t{left}\t{right}\n"));
            }
        }
    }
}

pub fn write_model(file: &ModelFile) -> Result<String> {
    let model = &file.model;
    let mut out = format!("{MODEL_MAGIC}\t{MODEL_VERSION}\n");
    out += &format!("method\t{}\n", model.method());
    out += "labels";
    for l in model.label_set().names() {
        out += "\t";
        out += check_field(l)?;
    }
    out += "\n";
    out += &format!("features\t{}\n", model.n_features());
    let s = &file.spec;
    let sampling = match s.sampling {
        Sampling::Weighted => "weighted",
        Sampling::Identity => "identity",
    };
    out += &format!(
        "spec\tn_models={}\tsample_ratio={}\tmax_depth={}\tmin_leaf={}\tsampling={sampling}\n",
        s.n_models, s.sample_ratio, s.tree.max_depth, s.tree.min_leaf
    );
    out += &format!("seed\t{}\n", file.seed);
    out += &format!("members\t{}\n", model.size());
    match model {
        Model::Single(tree) => {
            out += &format!("member\tnodes={}\n", tree.nodes().len());
            write_tree(&mut out, tree);
        }
        Model::Boost(ens) => {
            for r in ens.records() {
                out += &format!(
                    "member\tnodes={}\talpha={}\tbeta={}\tavg_loss={}\n",
                    r.model.nodes().len(),
                    r.alpha,
                    r.beta,
                    r.avg_loss
                );
                write_tree(&mut out, &r.model);
            }
        }
        Model::Bagged(_, ens) => {
            for tree in ens.trees() {
                out += &format!("member\tnodes={}\n", tree.nodes().len());
                write_tree(&mut out, tree);
            }
        }
    }
    out += "end\n";
    Ok(out)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::ModelFormat { line: self.line, msg: msg.into() }
    }

    /// Next line split on tabs, which must start with `key`.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (i, text) = self.inner.next().ok_or_else(|| self.err(format!("expected {key:?}, found end of file")))?;
        self.line = i + 1;
        let mut fields: Vec<&str> = text.split('\t').collect();
        if fields[0] != key {
            return Err(self.err(format!("expected {key:?}, found {:?}", fields[0])));
        }
        fields.remove(0);
        Ok(fields)
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        let (i, text) = self.inner.next().ok_or_else(|| self.err("unexpected end of file"))?;
        self.line = i + 1;
        Ok(text.split('\t').collect())
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let fields = self.expect(key)?;
        match fields.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("bad {key} value {v:?}"))),
            _ => Err(self.err(format!("{key} takes exactly one value"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, v: &str, what: &str) -> Result<T> {
        v.parse().map_err(|_| self.err(format!("bad {what} {v:?}")))
    }

    /// `key=value` fields in the given order.
    fn keyed<'f>(&self, fields: &[&'f str], keys: &[&str]) -> Result<Vec<&'f str>> {
        if fields.len() != keys.len() {
            return Err(self.err(format!("expected fields {keys:?}")));
        }
        fields
            .iter()
            .zip(keys)
            .map(|(f, k)| {
                f.strip_prefix(k)
                    .and_then(|rest| rest.strip_prefix('='))
                    .ok_or_else(|| self.err(format!("expected {k}=..., found {f:?}")))
            })
            .collect()
    }
}

fn read_tree(lines: &mut Lines<'_>, n_nodes: usize, labels: &LabelSet, d: usize) -> Result<RankingTree> {
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let fields = lines.next_fields()?;
        let node = match fields.as_slice() {
            ["leaf", ranks @ ..] => {
                let ranks = ranks.iter().map(|r| lines.parse(r, "rank")).collect::<Result<Vec<u32>>>()?;
                let consensus = Ranking::new(ranks).map_err(|e| lines.err(e.to_string()))?;
                Node::Leaf { consensus }
            }
            ["split", feature, threshold, left, right] => Node::Split {
                feature: lines.parse(feature, "feature index")?,
                threshold: lines.parse(threshold, "threshold")?,
                left: lines.parse(left, "child index")?,
                right: lines.parse(right, "child index")?,
            },
            other => return Err(lines.err(format!("expected a tree node, found {:?}", other[0]))),
        };
        nodes.push(node);
    }
    RankingTree::from_nodes(nodes, labels.clone(), d).map_err(|e| lines.err(e.to_string()))
}

pub fn read_model(text: &str) -> Result<ModelFile> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let version: u32 = lines.single(MODEL_MAGIC)?;
    if version != MODEL_VERSION {
        return Err(lines.err(format!("unsupported model file version {version}")));
    }
    let method: Method = {
        let name: String = lines.single("method")?;
        name.parse().map_err(|e: Error| lines.err(e.to_string()))?
    };
    let labels = LabelSet::new(lines.expect("labels")?).map_err(|e| lines.err(e.to_string()))?;
    let d: usize = lines.single("features")?;

    let spec_fields = lines.expect("spec")?;
    let v = lines.keyed(&spec_fields, &["n_models", "sample_ratio", "max_depth", "min_leaf", "sampling"])?;
    let sampling = match v[4] {
        "weighted" => Sampling::Weighted,
        "identity" => Sampling::Identity,
        other => return Err(lines.err(format!("unknown sampling {other:?}"))),
    };
    let spec = MethodSpec {
        method,
        n_models: lines.parse(v[0], "n_models")?,
        sample_ratio: lines.parse(v[1], "sample_ratio")?,
        tree: TreeConfig {
            max_depth: lines.parse(v[2], "max_depth")?,
            min_leaf: lines.parse(v[3], "min_leaf")?,
            ..TreeConfig::default()
        },
        sampling,
    };
    let seed: u64 = lines.single("seed")?;
    let members: usize = lines.single("members")?;
    if members == 0 || (method == Method::Single && members != 1) {
        return Err(lines.err(format!("{members} members is invalid for {method}")));
    }

    let mut trees = Vec::with_capacity(members);
    let mut weights = Vec::new();
    for _ in 0..members {
        let fields = lines.expect("member")?;
        let n_nodes: usize = if method == Method::Boost {
            let v = lines.keyed(&fields, &["nodes", "alpha", "beta", "avg_loss"])?;
            weights.push((
                lines.parse::<f64>(v[1], "alpha")?,
                lines.parse::<f64>(v[2], "beta")?,
                lines.parse::<f64>(v[3], "avg_loss")?,
            ));
            lines.parse(v[0], "node count")?
        } else {
            let v = lines.keyed(&fields, &["nodes"])?;
            lines.parse(v[0], "node count")?
        };
        trees.push(read_tree(&mut lines, n_nodes, &labels, d)?);
    }
    lines.expect("end")?;

    let wrap = |e: Error| Error::ModelFormat { line: 0, msg: e.to_string() };
    let model = match method {
        Method::Single => Model::Single(trees.pop().expect("one member")),
        Method::Boost => {
            let records = trees
                .into_iter()
                .zip(weights)
                .map(|(model, (alpha, beta, avg_loss))| IterationRecord { model, avg_loss, beta, alpha })
                .collect();
            Model::Boost(BoostedEnsemble::new(records, labels).map_err(wrap)?)
        }
        Method::BaggingModal => Model::Bagged(method, BaggedEnsemble::new(trees, Aggregator::Modal, labels).map_err(wrap)?),
        Method::BaggingBorda | Method::RandomForest => {
            Model::Bagged(method, BaggedEnsemble::new(trees, Aggregator::Borda, labels).map_err(wrap)?)
        }
    };
    Ok(ModelFile { spec, seed, model })
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    read_model(&read_text(path)?)
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    atomic_write(path, write_model(file)?.as_bytes())
}
