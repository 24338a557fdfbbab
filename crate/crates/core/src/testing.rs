//! Bernoulli test designs and the noiseless / symmetric-noise channels.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::items::DefectivityVector;
use crate::seed;

/// `t x n` binary inclusion matrix, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestDesign {
    t: usize,
    n: usize,
    matrix: Vec<bool>,
    /// Inclusion probability when generated by [`bernoulli_design`].
    pub bernoulli_p: Option<f64>,
    pub seed: Option<u64>,
}

impl TestDesign {
    pub fn from_rows(n: usize, rows: &[Vec<u8>]) -> Result<Self> {
        let mut matrix = Vec::with_capacity(rows.len() * n);
        for row in rows {
            check_dim(n, row.len())?;
            for &v in row {
                match v {
                    0 => matrix.push(false),
                    1 => matrix.push(true),
                    other => return invalid(format!("design entry must be 0 or 1, got {other}")),
                }
            }
        }
        Ok(Self { t: rows.len(), n, matrix, bernoulli_p: None, seed: None })
    }

    /// One test per item.
    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![false; n * n];
        for j in 0..n {
            matrix[j * n + j] = true;
        }
        Self { t: n, n, matrix, bernoulli_p: None, seed: None }
    }

    /// The first `t` tests (all of them when `t` exceeds the count).
    pub fn first_rows(&self, t: usize) -> Self {
        let t = t.min(self.t);
        Self { t, matrix: self.matrix[..t * self.n].to_vec(), ..self.clone() }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.matrix[i * self.n..(i + 1) * self.n]
    }

    /// Items included in test `i`.
    pub fn row_items(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter_map(|(j, &x)| x.then_some(j))
    }

    /// Fraction of ones over the whole matrix.
    pub fn density(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix.iter().filter(|&&x| x).count() as f64 / self.matrix.len() as f64
    }

    /// Noiseless outcome: test `i` is positive iff it includes a defective.
    pub fn noiseless_outcomes(&self, u: &[bool]) -> Vec<bool> {
        (0..self.t)
            .map(|i| self.row(i).iter().zip(u).any(|(&x, &d)| x && d))
            .collect()
    }

    /// Row-major 0/1 CSV preceded by `#` metadata lines.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# t={}", self.t)?;
        writeln!(w, "# n={}", self.n)?;
        if let Some(p) = self.bernoulli_p {
            writeln!(w, "# p={p}")?;
        }
        if let Some(s) = self.seed {
            writeln!(w, "# seed={s}")?;
        }
        writeln!(w, "# rng={}", seed::RNG_ID)?;
        for i in 0..self.t {
            let line: Vec<&str> = self.row(i).iter().map(|&x| if x { "1" } else { "0" }).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut rows = Vec::new();
        let mut n = None;
        let mut p = None;
        let mut seed = None;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.trim().split_once('=') {
                    let bad = |_| Error::Parse { line: i + 1, msg: format!("bad {key}") };
                    match key.trim() {
                        "n" => n = Some(value.trim().parse::<usize>().map_err(|_| bad(()))?),
                        "p" => p = Some(value.trim().parse::<f64>().map_err(|_| bad(()))?),
                        "seed" => seed = Some(value.trim().parse::<u64>().map_err(|_| bad(()))?),
                        _ => {}
                    }
                }
                continue;
            }
            let row = line
                .split(',')
                .map(|v| match v.trim() {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected 0 or 1, got {other:?}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = n.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
        let mut d = Self::from_rows(n, &rows)?;
        d.bernoulli_p = p;
        d.seed = seed;
        Ok(d)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<u8>> = (0..self.t)
            .map(|i| self.row(i).iter().map(|&x| u8::from(x)).collect())
            .collect();
        serde_json::json!({
            "meta": {
                "t": self.t,
                "n": self.n,
                "p": self.bernoulli_p,
                "seed": self.seed,
                "rng": seed::RNG_ID,
            },
            "matrix": rows,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let rows: Vec<Vec<u8>> = serde_json::from_value(v["matrix"].clone())?;
        let meta = &v["meta"];
        let n = meta["n"]
            .as_u64()
            .map(|n| n as usize)
            .or_else(|| rows.first().map(Vec::len))
            .unwrap_or(0);
        let mut d = Self::from_rows(n, &rows)?;
        d.bernoulli_p = meta["p"].as_f64();
        d.seed = meta["seed"].as_u64();
        Ok(d)
    }
}

/// I.i.d. Bernoulli(`p`) inclusion matrix.
pub fn bernoulli_design(t: usize, n: usize, p: f64, seed: u64) -> Result<TestDesign> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("Bernoulli parameter {p} outside [0, 1]"));
    }
    if n == 0 {
        return invalid("design needs at least one item");
    }
    let mut rng = seed::rng(seed);
    let matrix = (0..t * n).map(|_| rng.gen::<f64>() < p).collect();
    Ok(TestDesign { t, n, matrix, bernoulli_p: Some(p), seed: Some(seed) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeVector {
    pub y: Vec<bool>,
}

impl OutcomeVector {
    pub fn new(y: Vec<bool>) -> Self {
        Self { y }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn to_bitstring(&self) -> String {
        self.y.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Channel between the noiseless outcome and the observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Noiseless,
    /// Each outcome flipped independently with probability `rho ∈ [0, 0.5)`.
    Symmetric { rho: f64 },
}

impl NoiseSpec {
    pub fn symmetric(rho: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&rho) {
            return invalid(format!("flip probability {rho} outside [0, 0.5)"));
        }
        Ok(Self::Symmetric { rho })
    }

    /// Flip probability, `0` when noiseless.
    pub fn rho(&self) -> f64 {
        match *self {
            Self::Noiseless => 0.0,
            Self::Symmetric { rho } => rho,
        }
    }

    /// `true` for a symmetric channel with `rho > 0`.
    pub fn is_noisy(&self) -> bool {
        self.rho() > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Noiseless => Ok(()),
            Self::Symmetric { rho } => Self::symmetric(rho).map(|_| ()),
        }
    }
}

pub fn run_tests(
    design: &TestDesign,
    u: &DefectivityVector,
    noise: NoiseSpec,
    seed: u64,
) -> Result<OutcomeVector> {
    check_dim(design.n, u.len())?;
    noise.validate()?;
    let mut y = design.noiseless_outcomes(u.bits());
    if let NoiseSpec::Symmetric { rho } = noise {
        let mut rng = seed::rng(seed);
        for yi in &mut y {
            // one draw per test regardless of rho, so rho = 0 matches noiseless
            if rng.gen::<f64>() < rho {
                *yi = !*yi;
            }
        }
    }
    Ok(OutcomeVector::new(y))
}
