use super::gf::Field;
use super::{OuterCodeSpec, Symbol};
use crate::error::{Error, Result};

/// Narrow-sense Reed-Solomon code with roots `g^1 .. g^(n-k)`.
///
/// Position `i` of a codeword holds the coefficient of `x^(n-1-i)`, so its
/// error locator is `g^(n-1-i)`.
#[derive(Clone, Debug)]
pub struct ReedSolomon {
    spec: OuterCodeSpec,
    field: &'static Field,
    /// Generator polynomial, ascending coefficients, monic.
    generator: Vec<Symbol>,
}

impl ReedSolomon {
    pub fn new(spec: OuterCodeSpec) -> Result<Self> {
        spec.validate()?;
        let field = Field::get(spec.field_bits).expect("validated");
        let mut generator = vec![1];
        for i in 1..=spec.redundancy() {
            generator = field.poly_mul(&generator, &[field.alpha_pow(i as i64), 1]);
        }
        Ok(ReedSolomon { spec, field, generator })
    }

    pub fn spec(&self) -> &OuterCodeSpec {
        &self.spec
    }

    fn check_symbols(&self, s: &[Symbol]) -> Result<()> {
        let size = self.spec.alphabet_size();
        if let Some(&bad) = s.iter().find(|&&x| x as usize >= size) {
            return Err(Error::OuterCode(format!("symbol {bad} outside GF(2^{})", self.spec.field_bits)));
        }
        Ok(())
    }

    pub fn encode(&self, message: &[Symbol]) -> Result<Vec<Symbol>> {
        let (n, k) = (self.spec.n_o, self.spec.k_o);
        if message.len() != k {
            return Err(Error::OuterCode(format!("message has {} symbols, expected {k}", message.len())));
        }
        self.check_symbols(message)?;
        let f = self.field;
        let r = n - k;
        // remainder of m(x) x^r modulo g(x), by LFSR division
        let mut rem = vec![0 as Symbol; r];
        for &m in message {
            let fb = m ^ rem[r - 1];
            for j in (1..r).rev() {
                rem[j] = rem[j - 1] ^ f.mul(fb, self.generator[j]);
            }
            rem[0] = f.mul(fb, self.generator[0]);
        }
        let mut cw = message.to_vec();
        cw.extend(rem.iter().rev());
        Ok(cw)
    }

    /// Locator of position `i`.
    fn locator(&self, i: usize) -> Symbol {
        self.field.alpha_pow((self.spec.n_o - 1 - i) as i64)
    }

    fn syndromes(&self, word: &[Symbol]) -> Vec<Symbol> {
        let f = self.field;
        (1..=self.spec.redundancy())
            .map(|j| {
                let x = f.alpha_pow(j as i64);
                word.iter().fold(0, |acc, &c| f.mul(acc, x) ^ c)
            })
            .collect()
    }

    pub fn is_codeword(&self, word: &[Symbol]) -> bool {
        word.len() == self.spec.n_o && self.syndromes(word).iter().all(|&s| s == 0)
    }

    /// Errors-and-erasures decoding. See [`super::decode_errors_erasures`].
    pub fn decode(&self, received: &[Symbol], erased: &[bool]) -> Result<Option<Vec<Symbol>>> {
        let (n, k) = (self.spec.n_o, self.spec.k_o);
        if received.len() != n || erased.len() != n {
            return Err(Error::OuterCode(format!(
                "received word has {} symbols and {} flags, expected {n}",
                received.len(),
                erased.len()
            )));
        }
        self.check_symbols(received)?;
        Ok(self.decode_word(received, erased).map(|cw| cw[..k].to_vec()))
    }

    /// Returns the corrected codeword.
    pub(crate) fn decode_word(&self, received: &[Symbol], erased: &[bool]) -> Option<Vec<Symbol>> {
        let f = self.field;
        let n = self.spec.n_o;
        let r = self.spec.redundancy();
        let erasures: Vec<usize> = (0..n).filter(|&i| erased[i]).collect();
        let d = erasures.len();
        if d > r {
            return None;
        }
        let mut word: Vec<Symbol> = received
            .iter()
            .zip(erased)
            .map(|(&s, &e)| if e { 0 } else { s })
            .collect();
        let synd = self.syndromes(&word);
        if synd.iter().all(|&s| s == 0) {
            return Some(word);
        }

        // erasure locator prod (1 - X_e x)
        let mut gamma = vec![1 as Symbol];
        for &e in &erasures {
            gamma = f.poly_mul(&gamma, &[1, self.locator(e)]);
        }

        // Berlekamp-Massey seeded with the erasure locator
        let mut lambda = gamma.clone();
        let mut prev = gamma;
        let mut l = d;
        let mut shift = 1usize;
        let mut last_delta: Symbol = 1;
        for step in d..r {
            let mut delta = 0;
            for (i, &c) in lambda.iter().enumerate().take(step + 1) {
                delta ^= f.mul(c, synd[step - i]);
            }
            if delta == 0 {
                shift += 1;
                continue;
            }
            let scale = f.div(delta, last_delta);
            let mut next = lambda.clone();
            if next.len() < prev.len() + shift {
                next.resize(prev.len() + shift, 0);
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i + shift] ^= f.mul(scale, c);
            }
            if 2 * l <= step + d {
                l = step + 1 + d - l;
                prev = std::mem::replace(&mut lambda, next);
                last_delta = delta;
                shift = 1;
            } else {
                lambda = next;
                shift += 1;
            }
        }
        while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
            lambda.pop();
        }
        let degree = lambda.len() - 1;
        if degree != l || 2 * (l - d) + d > r {
            return None;
        }

        // Chien search over the code's positions
        let roots: Vec<usize> = (0..n)
            .filter(|&i| f.poly_eval(&lambda, f.inv(self.locator(i))) == 0)
            .collect();
        if roots.len() != degree {
            return None;
        }

        // Forney: e = Omega(X^-1) / Lambda'(X^-1) for first root g^1
        let mut omega = f.poly_mul(&synd, &lambda);
        omega.truncate(r);
        let deriv: Vec<Symbol> = lambda
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();
        for &i in &roots {
            let xinv = f.inv(self.locator(i));
            let den = f.poly_eval(&deriv, xinv);
            if den == 0 {
                return None;
            }
            word[i] ^= f.div(f.poly_eval(&omega, xinv), den);
        }
        if !self.is_codeword(&word) {
            return None;
        }
        // the correction must stay within the decoding radius
        let errors = (0..n).filter(|&i| !erased[i] && word[i] != received[i]).count();
        if 2 * errors + d > r {
            return None;
        }
        Some(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(n: usize, k: usize, bits: u32) -> ReedSolomon {
        ReedSolomon::new(OuterCodeSpec::new(n, k, bits).unwrap()).unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, k: usize, bits: u32) -> Vec<Symbol> {
        (0..k).map(|_| rng.random_range(0..1u16 << bits)).collect()
    }

    #[test]
    fn zero_message_gives_zero_codeword() {
        let c = code(16, 8, 8);
        assert_eq!(c.encode(&[0; 8]).unwrap(), vec![0; 16]);
    }

    #[test]
    fn systematic_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, k, bits) in [(16, 8, 8), (255, 223, 8), (15, 11, 4), (8, 1, 8)] {
            let c = code(n, k, bits);
            let m = random_message(&mut rng, k, bits);
            let cw = c.encode(&m).unwrap();
            assert_eq!(&cw[..k], &m[..]);
            assert!(c.is_codeword(&cw));
        }
    }

    #[test]
    fn k_one_recovers_from_any_single_symbol() {
        let c = code(8, 1, 8);
        let cw = c.encode(&[0x5a]).unwrap();
        for keep in 0..8 {
            let erased: Vec<bool> = (0..8).map(|i| i != keep).collect();
            let mut rx = cw.clone();
            for (i, s) in rx.iter_mut().enumerate() {
                if i != keep {
                    *s = 0xff;
                }
            }
            assert_eq!(c.decode(&rx, &erased).unwrap(), Some(vec![0x5a]));
        }
    }

    #[test]
    fn linearity() {
        let c = code(32, 20, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = random_message(&mut rng, 20, 8);
            let b = random_message(&mut rng, 20, 8);
            let sum: Vec<Symbol> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ea = c.encode(&a).unwrap();
            let eb = c.encode(&b).unwrap();
            let es: Vec<Symbol> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
            assert_eq!(c.encode(&sum).unwrap(), es);
        }
    }

    #[test]
    fn max_erasures_and_max_errors() {
        let c = code(16, 8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = random_message(&mut rng, 8, 8);
            let cw = c.encode(&m).unwrap();
            let mut rx = cw.clone();
            let mut erased = vec![false; 16];
            for i in sample(&mut rng, 16, 8) {
                erased[i] = true;
                rx[i] = rng.random_range(0..256);
            }
            assert_eq!(c.decode(&rx, &erased).unwrap().as_ref(), Some(&m));

            let mut rx = cw.clone();
            for i in sample(&mut rng, 16, 4) {
                rx[i] ^= rng.random_range(1..256);
            }
            assert_eq!(c.decode(&rx, &[false; 16]).unwrap().as_ref(), Some(&m));
        }
    }

    #[test]
    fn beyond_radius_never_silently_corrupts() {
        let c = code(16, 8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut failures = 0;
        for _ in 0..500 {
            let m = random_message(&mut rng, 8, 8);
            let cw = c.encode(&m).unwrap();
            let mut rx = cw.clone();
            let mut erased = vec![false; 16];
            let pos = sample(&mut rng, 16, 7);
            let pos = pos.into_vec();
            // 2t + d = 9 = n - k + 1
            for &i in &pos[..5] {
                erased[i] = true;
            }
            for &i in &pos[5..] {
                rx[i] ^= rng.random_range(1..256);
            }
            match c.decode_word(&rx, &erased) {
                None => failures += 1,
                Some(w) => {
                    assert!(c.is_codeword(&w));
                    let t = (0..16).filter(|&i| !erased[i] && w[i] != rx[i]).count();
                    assert!(2 * t + 5 <= 8);
                }
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn malformed_input_is_an_error() {
        let c = code(16, 8, 8);
        assert!(c.encode(&[0; 7]).is_err());
        assert!(c.decode(&[0; 15], &[false; 15]).is_err());
        assert!(c.decode(&[0; 16], &[false; 15]).is_err());
        let c4 = code(15, 8, 4);
        assert!(c4.encode(&[16, 0, 0, 0, 0, 0, 0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn decodes_within_radius(
            seed in any::<u64>(),
            nk in prop::sample::select(vec![(16usize, 8usize), (32, 16), (32, 24), (15, 7)]),
            t_frac in 0.0f64..=1.0,
        ) {
            let (n, k) = nk;
            let bits = if n == 15 { 4 } else { 8 };
            let c = code(n, k, bits);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = n - k;
            let t = ((r / 2) as f64 * t_frac).round() as usize;
            let d = rng.random_range(0..=r - 2 * t);
            let m = random_message(&mut rng, k, bits);
            let cw = c.encode(&m).unwrap();
            let mut rx = cw.clone();
            let mut erased = vec![false; n];
            let pos = sample(&mut rng, n, t + d).into_vec();
            for &i in &pos[..d] {
                erased[i] = true;
                rx[i] = rng.random_range(0..1u16 << bits);
            }
            for &i in &pos[d..] {
                rx[i] ^= rng.random_range(1..1u16 << bits);
            }
            prop_assert_eq!(c.decode(&rx, &erased).unwrap(), Some(m));
        }
    }
}
