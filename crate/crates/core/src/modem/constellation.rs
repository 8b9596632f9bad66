//! Gray-coded square constellations (802.11 mapping tables).

use crate::scalar::{cast, Scalar};
use num_complex::Complex;

/// Square QAM constellation with independent Gray coding per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Qpsk,
    Qam16,
    Qam64,
}

// Axis levels indexed by the Gray code value (b0 transmitted first = MSB).
const LEVELS_1: [f64; 2] = [-1.0, 1.0];
// 00 -> -3, 01 -> -1, 11 -> 1, 10 -> 3
const LEVELS_2: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];
// 000 -> -7, 001 -> -5, 011 -> -3, 010 -> -1, 110 -> 1, 111 -> 3, 101 -> 5, 100 -> 7
const LEVELS_3: [f64; 8] = [-7.0, -5.0, -1.0, -3.0, 7.0, 5.0, 1.0, 3.0];

// Gray code for the level at sorted position 0..2^n (inverse of the above).
const CODE_1: [u8; 2] = [0b0, 0b1];
const CODE_2: [u8; 4] = [0b00, 0b01, 0b11, 0b10];
const CODE_3: [u8; 8] = [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100];

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
            Constellation::Qam64 => 6,
        }
    }

    fn bits_per_axis(self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// Amplitude normalization for unit average symbol power.
    pub fn kmod(self) -> f64 {
        match self {
            Constellation::Qpsk => 1.0 / 2f64.sqrt(),
            Constellation::Qam16 => 1.0 / 10f64.sqrt(),
            Constellation::Qam64 => 1.0 / 42f64.sqrt(),
        }
    }

    fn levels(self) -> &'static [f64] {
        match self {
            Constellation::Qpsk => &LEVELS_1,
            Constellation::Qam16 => &LEVELS_2,
            Constellation::Qam64 => &LEVELS_3,
        }
    }

    fn codes(self) -> &'static [u8] {
        match self {
            Constellation::Qpsk => &CODE_1,
            Constellation::Qam16 => &CODE_2,
            Constellation::Qam64 => &CODE_3,
        }
    }

    fn axis_code(self, bits: &[bool]) -> usize {
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    /// Map `bits_per_symbol` bits (I bits first) to a constellation point.
    pub fn map<T: Scalar>(self, bits: &[bool]) -> Complex<T> {
        assert_eq!(bits.len(), self.bits_per_symbol());
        let nb = self.bits_per_axis();
        let levels = self.levels();
        let i = levels[self.axis_code(&bits[..nb])];
        let q = levels[self.axis_code(&bits[nb..])];
        let k = self.kmod();
        Complex::new(cast(i * k), cast(q * k))
    }

    fn decide_axis(self, v: f64) -> (f64, u8) {
        let n_levels = 1usize << self.bits_per_axis();
        let max_level = (n_levels - 1) as f64;
        // Levels sit at odd integers; snap to the nearest one.
        let idx = (((v / self.kmod() + max_level) / 2.0).round())
            .clamp(0.0, max_level) as usize;
        let level = 2.0 * idx as f64 - max_level;
        (level * self.kmod(), self.codes()[idx])
    }

    /// Hard nearest-neighbor decision; appends the decided bits (I bits
    /// first) and returns the decided constellation point.
    pub fn decide<T: Scalar>(self, z: Complex<T>, bits_out: &mut Vec<bool>) -> Complex<T> {
        let nb = self.bits_per_axis();
        let (i, code_i) = self.decide_axis(z.re.to_f64().unwrap_or(0.0));
        let (q, code_q) = self.decide_axis(z.im.to_f64().unwrap_or(0.0));
        for j in 0..nb {
            bits_out.push((code_i >> (nb - 1 - j)) & 1 == 1);
        }
        for j in 0..nb {
            bits_out.push((code_q >> (nb - 1 - j)) & 1 == 1);
        }
        Complex::new(cast(i), cast(q))
    }
}

impl std::str::FromStr for Constellation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::Qpsk),
            "qam16" | "16qam" => Ok(Constellation::Qam16),
            "qam64" | "64qam" => Ok(Constellation::Qam64),
            other => Err(format!("unknown constellation `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(code: usize, n: usize) -> Vec<bool> {
        (0..n).map(|j| (code >> (n - 1 - j)) & 1 == 1).collect()
    }

    #[test]
    fn map_decide_round_trip_all_points() {
        for c in [Constellation::Qpsk, Constellation::Qam16, Constellation::Qam64] {
            let nb = c.bits_per_symbol();
            for code in 0..(1usize << nb) {
                let bits = bits_of(code, nb);
                let z: Complex<f64> = c.map(&bits);
                let mut decided = Vec::new();
                let point = c.decide(z, &mut decided);
                assert_eq!(decided, bits, "{c:?} code {code:#b}");
                assert!((point - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_average_power() {
        for c in [Constellation::Qpsk, Constellation::Qam16, Constellation::Qam64] {
            let nb = c.bits_per_symbol();
            let total: f64 = (0..(1usize << nb))
                .map(|code| c.map::<f64>(&bits_of(code, nb)).norm_sqr())
                .sum();
            let avg = total / (1 << nb) as f64;
            assert!((avg - 1.0).abs() < 1e-12, "{c:?} average power {avg}");
        }
    }

    #[test]
    fn adjacent_levels_differ_in_one_bit() {
        // Gray property along each axis: CODE_* is indexed by sorted level.
        for codes in [&CODE_1[..], &CODE_2[..], &CODE_3[..]] {
            for w in codes.windows(2) {
                assert_eq!((w[0] ^ w[1]).count_ones(), 1);
            }
        }
    }
}
