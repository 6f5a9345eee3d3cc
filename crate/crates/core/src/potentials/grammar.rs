//! Text form of potentials:
//!
//! ```text
//! expr := const:<c> | pow:<a>
//!       | pw:a=<a>,b=<b>,alpha=<alpha>,beta=<beta>,m=<m>
//!       | ilog:k=<k>,rho=<rho> | xlog:k=<k>,D=<D>
//!       | scaled:alpha=<alpha>,(<expr>)
//!       | sum(<expr>;<expr>;...)
//! ```

use super::{PotentialError, RadialPotential};

pub fn parse_potential(src: &str) -> Result<RadialPotential, PotentialError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    p.skip_ws();
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> PotentialError {
        PotentialError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), PotentialError> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{lit}`")))
        }
    }

    fn number(&mut self) -> Result<f64, PotentialError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'+' || c == b'-')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign || (self.pos == start && (c == b'-' || c == b'+')) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.err("expected a finite number"))
            }
        }
    }

    fn integer(&mut self) -> Result<u32, PotentialError> {
        let at = self.pos;
        let v = self.number()?;
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            self.pos = at;
            Err(self.err("expected a nonnegative integer"))
        }
    }

    fn keyed(&mut self, key: &str) -> Result<f64, PotentialError> {
        self.expect(key)?;
        self.expect("=")?;
        self.number()
    }

    fn wrap(&self, r: Result<RadialPotential, PotentialError>, at: usize) -> Result<RadialPotential, PotentialError> {
        r.map_err(|e| match e {
            PotentialError::Param(msg) => PotentialError::Parse { pos: at, msg },
            other => other,
        })
    }

    fn expr(&mut self) -> Result<RadialPotential, PotentialError> {
        self.skip_ws();
        let at = self.pos;
        if self.eat("const:") {
            let c = self.number()?;
            self.wrap(RadialPotential::constant(c), at)
        } else if self.eat("pow:") {
            let a = self.number()?;
            self.wrap(RadialPotential::power(a), at)
        } else if self.eat("pw:") {
            let a = self.keyed("a")?;
            self.expect(",")?;
            let b = self.keyed("b")?;
            self.expect(",")?;
            let alpha = self.keyed("alpha")?;
            self.expect(",")?;
            let beta = self.keyed("beta")?;
            self.expect(",")?;
            let m = self.keyed("m")?;
            self.wrap(RadialPotential::power_weighted(a, b, alpha, beta, m), at)
        } else if self.eat("ilog:") {
            self.expect("k")?;
            self.expect("=")?;
            let k = self.integer()?;
            self.expect(",")?;
            let rho = self.keyed("rho")?;
            self.wrap(RadialPotential::iterated_log(k, rho), at)
        } else if self.eat("xlog:") {
            self.expect("k")?;
            self.expect("=")?;
            let k = self.integer()?;
            self.expect(",")?;
            let d = self.keyed("D")?;
            self.wrap(RadialPotential::xlog(k, d), at)
        } else if self.eat("scaled:") {
            let alpha = self.keyed("alpha")?;
            self.expect(",")?;
            self.expect("(")?;
            let inner = self.expr()?;
            self.expect(")")?;
            self.wrap(RadialPotential::scaled(alpha, inner), at)
        } else if self.eat("sum(") {
            let mut members = vec![self.expr()?];
            while self.eat(";") {
                members.push(self.expr()?);
            }
            self.expect(")")?;
            self.wrap(RadialPotential::sum(members), at)
        } else {
            Err(self.err("unknown potential kind"))
        }
    }
}
