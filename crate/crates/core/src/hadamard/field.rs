//! Tiny finite fields for Paley constructions: prime fields GF(p) and GF(9).
//!
//! Elements are labelled `0..q`. GF(9) is GF(3)[x]/(x^2 + 1) with the label
//! `a + 3b` standing for `a + b x`.

pub(crate) trait SmallField {
    fn order(&self) -> usize;
    fn sub(&self, a: usize, b: usize) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
}

pub(crate) struct PrimeField(pub usize);

impl SmallField for PrimeField {
    fn order(&self) -> usize {
        self.0
    }
    fn sub(&self, a: usize, b: usize) -> usize {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        (a * b) % self.0
    }
}

pub(crate) struct Gf9;

impl Gf9 {
    fn split(a: usize) -> (usize, usize) {
        (a % 3, a / 3)
    }
}

impl SmallField for Gf9 {
    fn order(&self) -> usize {
        9
    }
    fn sub(&self, a: usize, b: usize) -> usize {
        let (a0, a1) = Self::split(a);
        let (b0, b1) = Self::split(b);
        (a0 + 3 - b0) % 3 + 3 * ((a1 + 3 - b1) % 3)
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        // (a0 + a1 x)(b0 + b1 x) with x^2 = -1
        let (a0, a1) = Self::split(a);
        let (b0, b1) = Self::split(b);
        let c0 = (a0 * b0 + 2 * (a1 * b1)) % 3;
        let c1 = (a0 * b1 + a1 * b0) % 3;
        c0 + 3 * c1
    }
}

/// Quadratic character: 0 at 0, +1 on non-zero squares, -1 elsewhere.
pub(crate) fn quadratic_character(field: &dyn SmallField) -> Vec<i32> {
    let q = field.order();
    let mut chi = vec![-1; q];
    chi[0] = 0;
    for x in 1..q {
        chi[field.mul(x, x)] = 1;
    }
    chi
}

/// Jacobsthal matrix `Q[a][b] = χ(a - b)`.
pub(crate) fn jacobsthal(field: &dyn SmallField) -> Vec<Vec<i32>> {
    let q = field.order();
    let chi = quadratic_character(field);
    (0..q).map(|a| (0..q).map(|b| chi[field.sub(a, b)]).collect()).collect()
}

pub(crate) fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Field of order `q` when one is implemented.
pub(crate) fn field_of_order(q: usize) -> Option<Box<dyn SmallField>> {
    if is_prime(q) {
        Some(Box::new(PrimeField(q)))
    } else if q == 9 {
        Some(Box::new(Gf9))
    } else {
        None
    }
}
