//! Parsing of command-line values into library types.

use std::path::Path;

use anyhow::Result;
use repcount_core::enumerate::BlockBox;
use repcount_core::linalg::IntMatrix;
use repcount_core::{expand_system, ExpandedSystem, Form, TargetForm};

/// Bad user input; maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Largest `k` among the variables `x<k>` in form text.
pub fn infer_s(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(k) = text[start..j].parse::<usize>() {
                best = best.max(k);
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    best
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

/// Parses form text; `s` defaults to the largest variable index.
pub fn parse_form(text: &str, s: Option<usize>) -> Result<Form> {
    let s = s.unwrap_or_else(|| infer_s(text));
    if s == 0 {
        return Err(input_error("form has no variables x1, x2, ..."));
    }
    Ok(Form::parse(text.trim(), s)?)
}

/// Degree of a `j:n` listing, read off its first multi-index.
pub fn infer_d(psi: &str) -> Result<u32> {
    let first = psi
        .split(',')
        .map(str::trim)
        .find(|t| !t.is_empty())
        .ok_or_else(|| input_error("empty target form"))?;
    let (j, _) = first
        .split_once(':')
        .ok_or_else(|| input_error(format!("expected j:n, got {first:?}")))?;
    let j = j.trim();
    let d = if j.contains('.') { j.split('.').count() } else { j.chars().count() };
    Ok(d as u32)
}

pub fn parse_psi(text: &str, m: usize, d: Option<u32>) -> Result<TargetForm> {
    let d = match d {
        Some(d) => d,
        None => infer_d(text)?,
    };
    Ok(TargetForm::parse(text, m, d)?)
}

pub fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| input_error(format!("bad number {t:?}"))))
        .collect()
}

pub fn parse_ints<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| input_error(format!("bad integer {t:?}"))))
        .collect()
}

/// `P` for a uniform box or `P1,…,Pm`.
pub fn parse_box(text: &str, m: usize) -> Result<BlockBox> {
    let b = parse_floats(text)?;
    match b.len() {
        1 => Ok(BlockBox::uniform(m, b[0])?),
        k if k == m => Ok(BlockBox::new(b)?),
        k => Err(input_error(format!("box has {k} bounds, expected 1 or m = {m}"))),
    }
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let rows: Vec<Vec<i64>> =
        text.split(';').map(str::trim).filter(|r| !r.is_empty()).map(parse_ints).collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(input_error("empty matrix"));
    }
    Ok(IntMatrix::from_rows(&rows)?)
}

pub fn format_matrix(a: &IntMatrix) -> String {
    a.to_rows()
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

/// Form, ψ and the expanded system, checked against each other.
pub struct Instance {
    pub form: Form,
    pub psi: TargetForm,
    pub sys: ExpandedSystem,
}

impl Instance {
    pub fn new(form: Form, psi: TargetForm) -> Result<Instance> {
        let sys = expand_system(&form, psi.m())?;
        sys.check_target(&psi)?;
        Ok(Instance { form, psi, sys })
    }
}

/// Symmetric `B` with `ψ = tᵀBt`, when the cross coefficients are even.
pub fn psi_gram(psi: &TargetForm) -> Option<IntMatrix> {
    if psi.d() != 2 {
        return None;
    }
    let m = psi.m();
    let mut rows = vec![vec![0i64; m]; m];
    for (j, n) in psi.iter() {
        let e = j.entries();
        let (a, b) = (e[0] as usize, e[1] as usize);
        let n: i64 = n.try_into().ok()?;
        if a == b {
            rows[a][a] = n;
        } else {
            if n % 2 != 0 {
                return None;
            }
            rows[a][b] = n / 2;
            rows[b][a] = n / 2;
        }
    }
    IntMatrix::from_rows(&rows).ok()
}
