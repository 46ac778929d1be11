//! Unit-tagged times, rates and lengths.
//!
//! A quantity remembers the unit it was written in, so converting back to that
//! unit returns the stored number untouched. Conversions between units go
//! through SI seconds/metres.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    S,
    Ms,
    Us,
    Ns,
}

impl TimeUnit {
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::S => 1.0,
            TimeUnit::Ms => 1e-3,
            TimeUnit::Us => 1e-6,
            TimeUnit::Ns => 1e-9,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
            TimeUnit::Ns => "ns",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Time {
    pub value: f64,
    pub unit: TimeUnit,
}

impl Time {
    pub const fn new(value: f64, unit: TimeUnit) -> Self {
        Self { value, unit }
    }

    pub const fn us(value: f64) -> Self {
        Self::new(value, TimeUnit::Us)
    }

    pub const fn ms(value: f64) -> Self {
        Self::new(value, TimeUnit::Ms)
    }

    pub const fn ns(value: f64) -> Self {
        Self::new(value, TimeUnit::Ns)
    }

    pub const fn s(value: f64) -> Self {
        Self::new(value, TimeUnit::S)
    }

    pub fn in_unit(self, unit: TimeUnit) -> f64 {
        if unit == self.unit {
            self.value
        } else {
            self.value * self.unit.seconds() / unit.seconds()
        }
    }

    pub fn to(self, unit: TimeUnit) -> Time {
        Time::new(self.in_unit(unit), unit)
    }

    pub fn seconds(self) -> f64 {
        self.in_unit(TimeUnit::S)
    }

    pub fn scale(self, factor: f64) -> Time {
        Time::new(self.value * factor, self.unit)
    }

    /// Dimensionless ratio `self / other`.
    pub fn ratio(self, other: Time) -> f64 {
        self.in_unit(other.unit) / other.value
    }

    /// The rate `1 / self`, expressed per the same unit.
    pub fn inverse(self) -> Rate {
        Rate::new(1.0 / self.value, self.unit)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit.symbol())
    }
}

/// Events per unit time; `per` is the time unit of the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub per: TimeUnit,
}

impl Rate {
    pub const fn new(value: f64, per: TimeUnit) -> Self {
        Self { value, per }
    }

    pub const fn per_us(value: f64) -> Self {
        Self::new(value, TimeUnit::Us)
    }

    pub fn in_unit(self, per: TimeUnit) -> f64 {
        if per == self.per {
            self.value
        } else {
            self.value * per.seconds() / self.per.seconds()
        }
    }

    pub fn to(self, per: TimeUnit) -> Rate {
        Rate::new(self.in_unit(per), per)
    }

    pub fn hertz(self) -> f64 {
        self.in_unit(TimeUnit::S)
    }

    pub fn scale(self, factor: f64) -> Rate {
        Rate::new(self.value * factor, self.per)
    }

    pub fn min(self, other: Rate) -> Rate {
        if self.in_unit(other.per) <= other.value {
            self
        } else {
            other
        }
    }

    /// Mean waiting time `1 / self`, expressed in the rate's own unit.
    pub fn period(self) -> Time {
        Time::new(1.0 / self.value, self.per)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    M,
    Cm,
    Mm,
    Um,
}

impl LengthUnit {
    pub fn metres(self) -> f64 {
        match self {
            LengthUnit::M => 1.0,
            LengthUnit::Cm => 1e-2,
            LengthUnit::Mm => 1e-3,
            LengthUnit::Um => 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Length {
    pub value: f64,
    pub unit: LengthUnit,
}

impl Length {
    pub const fn new(value: f64, unit: LengthUnit) -> Self {
        Self { value, unit }
    }

    pub fn in_unit(self, unit: LengthUnit) -> f64 {
        if unit == self.unit {
            self.value
        } else {
            self.value * self.unit.metres() / unit.metres()
        }
    }

    pub fn metres(self) -> f64 {
        self.in_unit(LengthUnit::M)
    }
}

/// Distance covered per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Speed {
    pub length: Length,
    pub per: Time,
}

impl Speed {
    pub const fn new(length: Length, per: Time) -> Self {
        Self { length, per }
    }

    /// Time needed to cover `distance`, in the unit of `per`.
    pub fn travel_time(self, distance: Length) -> Time {
        let lengths = distance.in_unit(self.length.unit) / self.length.value;
        self.per.scale(lengths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_unit_round_trip_is_exact() {
        let t = Time::us(16.0);
        assert_eq!(t.in_unit(TimeUnit::Us), 16.0);
        assert_eq!(t.to(TimeUnit::Ms).to(TimeUnit::Us).unit, TimeUnit::Us);
        let r = Rate::per_us(286.0);
        assert_eq!(r.in_unit(TimeUnit::Us), 286.0);
    }

    #[test]
    fn conversions() {
        assert!((Time::ms(2.0).in_unit(TimeUnit::Us) - 2000.0).abs() < 1e-9);
        assert!((Rate::per_us(10.0).hertz() - 1e7).abs() < 1e-3);
        assert!((Rate::per_us(10.0).period().in_unit(TimeUnit::Ns) - 100.0).abs() < 1e-9);
        assert_eq!(Rate::per_us(10.0).min(Rate::new(1e6, TimeUnit::S)).value, 1e6);
        assert!((Time::ms(100.0).ratio(Time::s(2.0)) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn speed_travel_time() {
        let v = Speed::new(Length::new(1.0, LengthUnit::Um), Time::us(1.0));
        let t = v.travel_time(Length::new(10.0, LengthUnit::Cm));
        assert!((t.in_unit(TimeUnit::Ms) - 100.0).abs() < 1e-9);
    }
}
