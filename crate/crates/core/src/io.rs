//! File formats.
//!
//! | artifact          | format                                              |
//! |-------------------|-----------------------------------------------------|
//! | sequence          | CSV `index,value`, 1-based                          |
//! | function/measure  | CSV `index,re,im`, 0-based element index            |
//! | vector function   | CSV `index,component,re,im`                         |
//! | matrix            | CSV `row,col,re,im`, every entry exactly once       |
//! | matrix (binary)   | `CMAT`, `u64` rows, `u64` cols, then `(re, im)` `f64` pairs, row-major, all little-endian |
//! | chain             | directory of matrix CSVs plus `manifest.json`       |
//!
//! Numbers are written with 17 significant digits so that every `f64`
//! survives a round trip. Lines starting with `#` are ignored in CSV input.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::factorization::{FactorChain, Stage};
use crate::group::FiniteAbelianGroup;
use crate::linalg::{CMatrix, NormTag, ZERO};
use crate::lorentz::{LorentzParams, RealSeq};
use crate::vecconv::VectorFunction;

/// Largest matrix accepted by the readers, in entries.
pub const MAX_MATRIX_ENTRIES: usize = 1 << 24;
/// Largest sequence or function accepted by the readers.
pub const MAX_CSV_ROWS: usize = 1 << 24;

pub const BINARY_MAGIC: &[u8; 4] = b"CMAT";

/// Serde adapter writing non-finite exponents as `"inf"`.
pub mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => Err(de::Error::custom(format!(
                    "expected a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses a real, accepting `inf`/`infinity` as well as ordinary decimals.
pub fn parse_real(text: &str) -> Option<f64> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Some(f64::INFINITY),
        t => t.parse().ok(),
    }
}

fn csv_records(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let got = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if got.len() != header.len() || got.iter().zip(header).any(|(a, b)| !a.eq_ignore_ascii_case(b)) {
        return Err(parse_err(
            1,
            format!(
                "expected header {:?}, got {:?}",
                header.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, got {}", header.len(), rec.len()),
            ));
        }
        if out.len() >= MAX_CSV_ROWS {
            return Err(Error::SizeGuard(format!("more than {MAX_CSV_ROWS} rows")));
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn field_usize(line: usize, v: &str, what: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| parse_err(line, format!("{what} must be a non-negative integer, got {v:?}")))
}

fn field_f64(line: usize, v: &str, what: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(parse_err(line, format!("{what} must be a finite number, got {v:?}"))),
    }
}

/// Places `(index, value)` pairs into a dense vector, requiring every slot
/// exactly once.
fn dense<T: Copy>(len: usize, fill: T, items: Vec<(usize, usize, T)>, what: &str) -> Result<Vec<T>> {
    let mut out = vec![fill; len];
    let mut seen = vec![false; len];
    for (line, idx, v) in items {
        if idx >= len {
            return Err(parse_err(line, format!("{what} index {idx} out of range")));
        }
        if std::mem::replace(&mut seen[idx], true) {
            return Err(parse_err(line, format!("duplicate {what} index {idx}")));
        }
        out[idx] = v;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(parse_err(0, format!("missing {what} index {missing}")));
    }
    Ok(out)
}

pub fn write_sequence_csv(x: &RealSeq) -> String {
    let mut s = String::from("index,value\n");
    for (n, v) in x.values().iter().enumerate() {
        s.push_str(&format!("{},{}\n", n + 1, fmt_f64(*v)));
    }
    s
}

pub fn read_sequence_csv(text: &str) -> Result<RealSeq> {
    let rows = csv_records(text, &["index", "value"])?;
    let n = rows.len();
    let mut items = Vec::with_capacity(n);
    for (line, r) in rows {
        let idx = field_usize(line, &r[0], "index")?;
        if idx == 0 {
            return Err(parse_err(line, "sequence indices start at 1"));
        }
        items.push((line, idx - 1, field_f64(line, &r[1], "value")?));
    }
    RealSeq::new(dense(n, 0.0, items, "sequence")?)
}

/// One quasi-norm evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    #[serde(with = "ext_real")]
    pub p: f64,
    #[serde(with = "ext_real")]
    pub q: f64,
    pub norm: f64,
    /// `direct`, `dyadic` or `linear-dyadic`.
    pub variant: String,
}

pub fn write_complex_csv(values: &[Complex64]) -> String {
    let mut s = String::from("index,re,im\n");
    for (k, z) in values.iter().enumerate() {
        s.push_str(&format!("{k},{},{}\n", fmt_f64(z.re), fmt_f64(z.im)));
    }
    s
}

/// Values of a function or atoms of a measure on `group`.
pub fn read_complex_csv(text: &str, group: &FiniteAbelianGroup) -> Result<Vec<Complex64>> {
    let rows = csv_records(text, &["index", "re", "im"])?;
    if rows.len() != group.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows for a group of order {}",
            rows.len(),
            group.order()
        )));
    }
    let items = rows
        .into_iter()
        .map(|(line, r)| {
            Ok((
                line,
                field_usize(line, &r[0], "index")?,
                Complex64::new(field_f64(line, &r[1], "re")?, field_f64(line, &r[2], "im")?),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    dense(group.order(), ZERO, items, "element")
}

pub fn write_vector_function_csv(f: &VectorFunction) -> String {
    let mut s = String::from("index,component,re,im\n");
    let d = f.dim();
    for (k, z) in f.values().iter().enumerate() {
        s.push_str(&format!("{},{},{},{}\n", k / d, k % d, fmt_f64(z.re), fmt_f64(z.im)));
    }
    s
}

/// The dimension is inferred from the largest component index.
pub fn read_vector_function_csv(text: &str, group: &FiniteAbelianGroup) -> Result<VectorFunction> {
    let rows = csv_records(text, &["index", "component", "re", "im"])?;
    let mut parsed = Vec::with_capacity(rows.len());
    let mut dim = 0;
    for (line, r) in rows {
        let t = field_usize(line, &r[0], "index")?;
        let c = field_usize(line, &r[1], "component")?;
        if t >= group.order() {
            return Err(parse_err(line, format!("element index {t} out of range")));
        }
        dim = dim.max(c + 1);
        let z = Complex64::new(field_f64(line, &r[2], "re")?, field_f64(line, &r[3], "im")?);
        parsed.push((line, t, c, z));
    }
    if dim == 0 {
        return Err(parse_err(0, "no values"));
    }
    let len = group
        .order()
        .checked_mul(dim)
        .filter(|&l| l <= MAX_CSV_ROWS)
        .ok_or_else(|| Error::SizeGuard(format!("{} x {dim} vector function", group.order())))?;
    let items = parsed
        .into_iter()
        .map(|(line, t, c, z)| (line, t * dim + c, z))
        .collect();
    VectorFunction::new(group.clone(), dim, dense(len, ZERO, items, "entry")?)
}

pub fn write_matrix_csv(m: &CMatrix) -> String {
    let mut s = String::from("row,col,re,im\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            s.push_str(&format!("{i},{j},{},{}\n", fmt_f64(z.re), fmt_f64(z.im)));
        }
    }
    s
}

/// Dimensions are inferred from the largest indices; every entry must be
/// listed exactly once.
pub fn read_matrix_csv(text: &str) -> Result<CMatrix> {
    let rows = csv_records(text, &["row", "col", "re", "im"])?;
    let mut parsed = Vec::with_capacity(rows.len());
    let (mut nr, mut nc) = (0usize, 0usize);
    for (line, r) in rows {
        let i = field_usize(line, &r[0], "row")?;
        let j = field_usize(line, &r[1], "col")?;
        nr = nr.max(i.saturating_add(1));
        nc = nc.max(j.saturating_add(1));
        let z = Complex64::new(field_f64(line, &r[2], "re")?, field_f64(line, &r[3], "im")?);
        parsed.push((line, i, j, z));
    }
    if parsed.is_empty() {
        return Err(parse_err(0, "no entries"));
    }
    let len = nr
        .checked_mul(nc)
        .filter(|&l| l <= MAX_MATRIX_ENTRIES)
        .ok_or_else(|| Error::SizeGuard(format!("{nr} x {nc} matrix")))?;
    let items = parsed
        .into_iter()
        .map(|(line, i, j, z)| (line, i * nc + j, z))
        .collect();
    CMatrix::from_vec(nr, nc, dense(len, ZERO, items, "entry")?)
}

pub fn write_matrix_binary(m: &CMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 16 * m.as_slice().len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for z in m.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn read_matrix_binary(bytes: &[u8]) -> Result<CMatrix> {
    let bin_err = |msg: String| Error::Parse { line: 0, msg };
    if bytes.len() < 20 || &bytes[..4] != BINARY_MAGIC {
        return Err(bin_err("missing CMAT header".into()));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(4), word(12));
    let len = usize::try_from(rows)
        .ok()
        .zip(usize::try_from(cols).ok())
        .and_then(|(r, c)| r.checked_mul(c))
        .filter(|&l| l <= MAX_MATRIX_ENTRIES)
        .ok_or_else(|| Error::SizeGuard(format!("{rows} x {cols} matrix")))?;
    let body = &bytes[20..];
    if body.len() != 16 * len {
        return Err(bin_err(format!(
            "expected {} payload bytes, got {}",
            16 * len,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let m = CMatrix::from_vec(rows as usize, cols as usize, data)?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

/// Reads a matrix, choosing the format from the leading magic bytes.
pub fn read_matrix_file(path: &Path) -> Result<CMatrix> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        read_matrix_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| parse_err(0, "matrix file is neither CSV nor CMAT"))?;
        read_matrix_csv(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub file: String,
    pub from: NormTag,
    pub to: NormTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainManifest {
    /// Application order: `stages[0]` acts first.
    pub stages: Vec<StageEntry>,
    pub middle_index: usize,
    pub middle_params: LorentzParams,
    /// Free-form exponent bookkeeping, e.g. `{"s": 0.5, "r": 1.0}`.
    #[serde(default)]
    pub exponents: serde_json::Map<String, serde_json::Value>,
}

impl ChainManifest {
    /// Parses and checks the manifest without touching the file system.
    pub fn parse(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.stages.is_empty() || m.middle_index >= m.stages.len() {
            return Err(Error::InvalidInput(format!(
                "middle index {} for {} stages",
                m.middle_index,
                m.stages.len()
            )));
        }
        LorentzParams::new(m.middle_params.p, m.middle_params.q)?;
        for s in &m.stages {
            let plain = !s.file.is_empty()
                && s.file != "."
                && s.file != ".."
                && !s.file.contains(['/', '\\'])
                && !s.file.contains('\0');
            if !plain {
                return Err(Error::InvalidInput(format!(
                    "stage file {:?} is not a plain file name",
                    s.file
                )));
            }
        }
        Ok(m)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `stage_<k>.csv` for every stage plus `manifest.json`.
pub fn write_chain(
    dir: &Path,
    chain: &FactorChain,
    exponents: serde_json::Map<String, serde_json::Value>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut stages = Vec::new();
    for (k, st) in chain.stages().iter().enumerate() {
        let file = format!("stage_{k}.csv");
        fs::write(dir.join(&file), write_matrix_csv(&st.matrix))?;
        stages.push(StageEntry {
            file,
            from: st.from,
            to: st.to,
        });
    }
    let manifest = ChainManifest {
        stages,
        middle_index: chain.middle_index(),
        middle_params: chain.middle_params(),
        exponents,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

pub fn read_chain(dir: &Path) -> Result<(FactorChain, ChainManifest)> {
    let manifest = ChainManifest::parse(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let stages = manifest
        .stages
        .iter()
        .map(|e| Ok(Stage::new(read_matrix_file(&dir.join(&e.file))?, e.from, e.to)))
        .collect::<Result<Vec<_>>>()?;
    let chain = FactorChain::new(stages, manifest.middle_index, manifest.middle_params)?;
    Ok((chain, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_real_round_trip() {
        let p = LorentzParams::new(f64::INFINITY, f64::INFINITY).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"p":"inf","q":"inf"}"#);
        assert_eq!(serde_json::from_str::<LorentzParams>(&s).unwrap(), p);
        assert!(serde_json::from_str::<LorentzParams>(r#"{"p":"big","q":1}"#).is_err());
    }

    #[test]
    fn sequence_round_trip_is_exact() {
        let x = RealSeq::new(vec![0.1, 1.0 / 3.0, 0.0, 1e-300, 7.0]).unwrap();
        let back = read_sequence_csv(&write_sequence_csv(&x)).unwrap();
        assert_eq!(back.values(), x.values());
    }

    #[test]
    fn sequence_rejects_gaps_and_duplicates() {
        assert!(read_sequence_csv("index,value\n1,0.5\n3,0.2\n").is_err());
        assert!(read_sequence_csv("index,value\n1,0.5\n1,0.2\n").is_err());
        assert!(read_sequence_csv("index,value\n0,0.5\n").is_err());
        assert!(read_sequence_csv("idx,value\n1,0.5\n").is_err());
        assert!(read_sequence_csv("index,value\n1,-0.5\n").is_err());
        let ok = read_sequence_csv("# comment\nindex,value\n2,0.25\n1,0.5\n").unwrap();
        assert_eq!(ok.values(), &[0.5, 0.25]);
    }

    #[test]
    fn matrix_round_trips() {
        let m = CMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 / 7.0, -(j as f64) * 0.1));
        assert_eq!(read_matrix_csv(&write_matrix_csv(&m)).unwrap(), m);
        assert_eq!(read_matrix_binary(&write_matrix_binary(&m)).unwrap(), m);
    }

    #[test]
    fn matrix_csv_requires_dense_listing() {
        assert!(read_matrix_csv("row,col,re,im\n0,0,1,0\n1,1,1,0\n").is_err());
        assert!(read_matrix_csv("row,col,re,im\n0,0,1,0\n0,0,1,0\n").is_err());
        assert!(read_matrix_csv("row,col,re,im\n").is_err());
        assert!(read_matrix_csv("row,col,re,im\n0,0,nan,0\n").is_err());
        assert!(read_matrix_csv("row,col,re,im\n99999999,99999999,1,0\n").is_err());
    }

    #[test]
    fn binary_guards() {
        assert!(read_matrix_binary(b"CMAT").is_err());
        let mut huge = BINARY_MAGIC.to_vec();
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        huge.extend_from_slice(&2u64.to_le_bytes());
        assert!(matches!(read_matrix_binary(&huge), Err(Error::SizeGuard(_))));
        let mut short = write_matrix_binary(&CMatrix::identity(2));
        short.pop();
        assert!(read_matrix_binary(&short).is_err());
    }

    #[test]
    fn complex_and_vector_csv() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let v = vec![Complex64::new(1.0, 2.0), ZERO, Complex64::new(-0.5, 0.25)];
        assert_eq!(read_complex_csv(&write_complex_csv(&v), &g).unwrap(), v);
        assert!(read_complex_csv("index,re,im\n0,1,0\n", &g).is_err());

        let f = VectorFunction::new(g.clone(), 2, (0..6).map(|k| Complex64::new(k as f64, 0.5)).collect()).unwrap();
        assert_eq!(read_vector_function_csv(&write_vector_function_csv(&f), &g).unwrap(), f);
        assert!(read_vector_function_csv("index,component,re,im\n0,0,1,0\n", &g).is_err());
    }

    #[test]
    fn manifest_rejects_paths() {
        let text =
            r#"{"stages":[{"file":"../x.csv","from":"l2","to":"l2"}],"middle_index":0,"middle_params":{"p":1,"q":1}}"#;
        assert!(ChainManifest::parse(text).is_err());
        let text =
            r#"{"stages":[{"file":"a.csv","from":"l2","to":"l2"}],"middle_index":1,"middle_params":{"p":1,"q":1}}"#;
        assert!(ChainManifest::parse(text).is_err());
        let text = r#"{"stages":[{"file":"a.csv","from":"l1","to":"linf"}],"middle_index":0,"middle_params":{"p":"inf","q":"inf"}}"#;
        assert!(ChainManifest::parse(text).is_ok());
    }

    #[test]
    fn chain_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = CMatrix::from_fn(2, 3, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let chain = FactorChain::from_svd(&t, LorentzParams::new(1.0, 1.0).unwrap()).unwrap();
        write_chain(dir.path(), &chain, serde_json::Map::new()).unwrap();
        let (back, manifest) = read_chain(dir.path()).unwrap();
        assert_eq!(back, chain);
        assert_eq!(manifest.stages.len(), 3);
    }
}
