use std::collections::HashMap;
use std::sync::Mutex;

use crate::cmcheck::Evaluation;
use crate::error::Result;

/// Cache of a pure one-dimensional evaluator, keyed by the bit pattern of
/// the argument. Failures are not cached.
#[derive(Debug, Default)]
pub(crate) struct Memo {
    values: Mutex<HashMap<u64, Evaluation>>,
}

impl Memo {
    pub fn get_or_compute<F>(&self, x: f64, f: F) -> Result<Evaluation>
    where
        F: FnOnce() -> Result<Evaluation>,
    {
        if let Some(e) = self.values.lock().expect("memo lock").get(&x.to_bits()) {
            return Ok(*e);
        }
        let e = f()?;
        self.values
            .lock()
            .expect("memo lock")
            .insert(x.to_bits(), e);
        Ok(e)
    }
}
