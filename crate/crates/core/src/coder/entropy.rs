use super::bits::gamma_len;

/// Number of dither-phase contexts.
pub(crate) const CONTEXTS: usize = 16;
/// Zigzag indices `0..DIRECT` are modelled directly; larger ones go through an
/// escape symbol followed by their Elias-gamma excess.
const DIRECT: usize = 16;

/// Adaptive zero-order model with Krichevsky–Trofimov counts, one per
/// dither-phase context. Accumulates the ideal codelength in bits.
#[derive(Debug, Clone)]
pub(crate) struct KtModel {
    counts: Vec<[u64; DIRECT + 1]>,
    totals: Vec<u64>,
}

impl KtModel {
    pub fn new() -> Self {
        KtModel {
            counts: vec![[0; DIRECT + 1]; CONTEXTS],
            totals: vec![0; CONTEXTS],
        }
    }

    /// Phase of the dither within the cell, quantized to `CONTEXTS` bins.
    pub fn context(dither: f64, step: f64) -> usize {
        let phase = dither / step + 0.5;
        ((phase * CONTEXTS as f64).floor().max(0.0) as usize).min(CONTEXTS - 1)
    }

    /// Codelength of `zig` in `ctx`, then updates the counts.
    pub fn code(&mut self, ctx: usize, zig: Option<u64>) -> f64 {
        let (sym, extra) = match zig {
            Some(z) if (z as usize) < DIRECT => (z as usize, 0.0),
            Some(z) => (DIRECT, gamma_len(z - DIRECT as u64 + 1) as f64),
            None => (DIRECT, 64.0),
        };
        let c = &mut self.counts[ctx];
        let p = (c[sym] as f64 + 0.5) / (self.totals[ctx] as f64 + 0.5 * (DIRECT + 1) as f64);
        c[sym] += 1;
        self.totals[ctx] += 1;
        -p.log2() + extra
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_symbol_costs_log_alphabet() {
        let mut m = KtModel::new();
        assert!((m.code(0, Some(0)) - ((DIRECT + 1) as f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn repeated_symbol_gets_cheap() {
        let mut m = KtModel::new();
        let costs: Vec<f64> = (0..1000).map(|_| m.code(3, Some(2))).collect();
        assert!(costs[999] < 0.02);
        assert!(costs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn contexts_cover_the_cell() {
        assert_eq!(KtModel::context(-0.5, 1.0), 0);
        assert_eq!(KtModel::context(0.5, 1.0), CONTEXTS - 1);
        assert_eq!(KtModel::context(0.0, 1.0), CONTEXTS / 2);
    }
}
