use std::fmt;

/// Score statistics over a set of games.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub games: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1).
    pub sd: f64,
    /// `sd / √games`.
    pub se: f64,
    pub histogram: [u32; 26],
}

pub fn summarize(scores: &[u8]) -> Summary {
    let n = scores.len();
    let mut histogram = [0u32; 26];
    for &s in scores {
        histogram[usize::from(s).min(25)] += 1;
    }
    if n == 0 {
        return Summary { games: 0, mean: f64::NAN, sd: f64::NAN, se: f64::NAN, histogram };
    }
    let mean = scores.iter().map(|&s| f64::from(s)).sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (scores.iter().map(|&s| (f64::from(s) - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary { games: n, mean, sd, se: sd / (n as f64).sqrt(), histogram }
}

/// Nearest-rank percentile, `q` in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (q * v.len() as f64).ceil().max(1.0) as usize;
    v[rank.min(v.len()) - 1]
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2} ({} games)", self.mean, self.se, self.games)
    }
}
