//! Text formatting shared by every file the toolkit writes.

/// Scientific notation with 17 significant digits, enough for an exact round trip.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        assert_eq!(number(0.0), "0.0000000000000000e0");
        assert_eq!(number(-1e-10), "-1.0000000000000000e-10");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }
}
