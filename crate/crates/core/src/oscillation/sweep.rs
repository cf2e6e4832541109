use rayon::prelude::*;

/// Evaluates `f` on every input in parallel; results keep the input order.
pub fn sweep<T, R, F>(inputs: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    inputs.par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_order() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let ys = sweep(&xs, |x| x * x);
        assert!(ys.iter().enumerate().all(|(i, y)| *y == (i * i) as f64));
    }
}
