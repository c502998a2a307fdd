use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::solvers::{Solver, SolverError};

type Builder = dyn Fn(&[f64]) -> Result<Arc<dyn Solver>, SolverError> + Send + Sync;

/// Solver operators indexed by physical parameters, built once per value.
#[derive(Clone)]
pub struct SolverFamily {
    build: Arc<Builder>,
    cache: Arc<Mutex<HashMap<Vec<u64>, Arc<dyn Solver>>>>,
    capacity: usize,
}

impl std::fmt::Debug for SolverFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverFamily").field("capacity", &self.capacity).finish()
    }
}

impl SolverFamily {
    pub fn new(build: impl Fn(&[f64]) -> Result<Arc<dyn Solver>, SolverError> + Send + Sync + 'static) -> Self {
        Self {
            build: Arc::new(build),
            cache: Arc::new(Mutex::new(HashMap::new())),
            capacity: 1024,
        }
    }

    /// One operator for every parameter value.
    pub fn constant(solver: Arc<dyn Solver>) -> Self {
        Self::new(move |_| Ok(solver.clone()))
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn get(&self, params: &[f64]) -> Result<Arc<dyn Solver>, SolverError> {
        let key: Vec<u64> = params.iter().map(|p| p.to_bits()).collect();
        let mut cache = self.cache.lock().expect("solver cache poisoned");
        if let Some(s) = cache.get(&key) {
            return Ok(s.clone());
        }
        let s = (self.build)(params)?;
        if cache.len() >= self.capacity {
            cache.clear();
        }
        cache.insert(key, s.clone());
        Ok(s)
    }
}
