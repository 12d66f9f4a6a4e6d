use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationSample {
    pub iter: usize,
    pub relres: f64,
    pub seconds: f64,
}

/// What an outer solve did.
///
/// `binv_applications` counts every `B⁻¹` call, including the one applied to
/// the initial residual; a zero right-hand side returns at once with no
/// calls. `inner_products` counts global reductions (dot products and
/// norms) made while iterating.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    pub relres: f64,
    pub converged: bool,
    pub history: Vec<IterationSample>,
    pub binv_applications: u64,
    pub inner_products: u64,
}

impl IterationReport {
    /// `iter,relres,seconds` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,relres,seconds\n");
        for h in &self.history {
            let _ = writeln!(s, "{},{:e},{:.6}", h.iter, h.relres, h.seconds);
        }
        s
    }
}
