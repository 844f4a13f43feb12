//! Row-level execution strategy for raster sweeps.

/// How independent rows of a raster are evaluated. Results are assembled in
/// row order either way, so output never depends on the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Rows are spread over the current rayon pool.
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    pub(crate) fn map_rows<T, F>(self, rows: usize, f: F) -> Vec<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Vec<T> + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..rows).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..rows).into_par_iter().map(f).collect()
            }
        }
    }

    pub(crate) fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }
}
