//! Supported input ranges, taken from the span of the training corpus.
//! Values outside an envelope are extrapolation: accepted, but flagged.

use std::fmt;

use super::Element;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub lo: f64,
    pub hi: f64,
}

impl Envelope {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Envelope { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Austenitization temperature, degrees Celsius.
pub const AUST_TEMP_ENVELOPE: Envelope = Envelope::new(600.0, 1480.0);
/// Austenitization hold time, seconds.
pub const AUST_TIME_ENVELOPE: Envelope = Envelope::new(0.1, 9000.0);
/// log10 cooling rate, K/s.
pub const LOG_RATE_ENVELOPE: Envelope = Envelope::new(-3.03, 3.25);

/// Supported weight-percent range per element.
pub fn element_envelope(e: Element) -> Envelope {
    match e {
        Element::C => Envelope::new(0.0003, 3.89),
        Element::Mn => Envelope::new(0.000005, 12.5),
        Element::Si => Envelope::new(0.000007, 4.48),
        Element::Cr => Envelope::new(0.000003, 26.0),
        Element::Mo => Envelope::new(0.0008, 9.46),
        Element::S => Envelope::new(0.00004, 0.45),
        Element::P => Envelope::new(0.00007, 0.14),
        Element::Ni => Envelope::new(0.00001, 20.0),
        Element::Al => Envelope::new(0.001, 2.1),
        Element::Cu => Envelope::new(0.001, 6.5),
        Element::Nb => Envelope::new(0.0001, 3.0),
        Element::V => Envelope::new(0.0003, 10.0),
        Element::W => Envelope::new(0.005, 17.8),
        Element::Co => Envelope::new(0.002, 13.4),
        Element::N => Envelope::new(0.0005, 1.8),
        Element::Ti => Envelope::new(0.0003, 1.62),
        Element::B => Envelope::new(0.000004, 0.03),
    }
}
