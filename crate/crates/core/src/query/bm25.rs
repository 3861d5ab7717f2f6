use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0) || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidConfig(format!("bm25 parameters out of range: k1={} b={}", self.k1, self.b)));
        }
        Ok(())
    }
}

/// `ln(1 + (n - df + 0.5) / (df + 0.5))`
pub fn idf(df: u64, n_docs: u64) -> f64 {
    let (df, n) = (df as f64, n_docs as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

pub fn bm25_score(tf: u32, df: u64, n_docs: u64, doc_len: u32, avg_doc_len: f64, params: Bm25Params) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = f64::from(tf);
    let norm = if avg_doc_len > 0.0 { f64::from(doc_len) / avg_doc_len } else { 1.0 };
    let denom = tf + params.k1 * (1.0 - params.b + params.b * norm);
    idf(df, n_docs) * tf * (params.k1 + 1.0) / denom
}
