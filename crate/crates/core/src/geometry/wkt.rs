// SPDX-License-Identifier: Apache-2.0

//! Minimal WKT reader for 2-D POINT, LINESTRING and POLYGON literals.

use thiserror::Error;

use super::{Coord, Geometry, Polygon};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WktError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid geometry: {0}")]
    Invalid(String),
}

pub fn parse_wkt(text: &str) -> Result<Geometry, WktError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let geom = p.geometry()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing characters"));
    }
    geom.validate()
        .map_err(|e| WktError::Invalid(e.to_string()))?;
    Ok(geom)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> WktError {
        WktError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), WktError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", ch as char)))
        }
    }

    fn keyword(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).to_ascii_uppercase()
    }

    fn geometry(&mut self) -> Result<Geometry, WktError> {
        let start = self.pos;
        let kw = self.keyword();
        match kw.as_str() {
            "POINT" => {
                self.expect(b'(')?;
                let c = self.coord()?;
                self.expect(b')')?;
                Ok(Geometry::Point(c))
            }
            "LINESTRING" => {
                let cs = self.coord_seq()?;
                if cs.len() < 2 {
                    return Err(WktError::Invalid(
                        "linestring needs at least 2 coordinates".into(),
                    ));
                }
                Ok(Geometry::LineString(cs))
            }
            "POLYGON" => {
                self.expect(b'(')?;
                let mut rings = vec![self.coord_seq()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    rings.push(self.coord_seq()?);
                }
                self.expect(b')')?;
                let exterior = rings.remove(0);
                Polygon::new(exterior, rings)
                    .map(Geometry::Polygon)
                    .map_err(|e| WktError::Invalid(e.to_string()))
            }
            "" => {
                self.pos = start;
                Err(self.err("expected geometry keyword"))
            }
            other => {
                self.pos = start;
                Err(self.err(&format!("unsupported geometry type {other}")))
            }
        }
    }

    fn coord_seq(&mut self) -> Result<Vec<Coord>, WktError> {
        self.expect(b'(')?;
        let mut cs = vec![self.coord()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            cs.push(self.coord()?);
        }
        self.expect(b')')?;
        Ok(cs)
    }

    fn coord(&mut self) -> Result<Coord, WktError> {
        let x = self.number()?;
        let y = self.number()?;
        Ok(Coord::new(x, y))
    }

    fn number(&mut self) -> Result<f64, WktError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && matches!(self.src[self.pos], b'0'..=b'9' | b'-' | b'+' | b'.' | b'e' | b'E')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.err("expected number"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_point() {
        assert_eq!(parse_wkt("POINT (1 2)").unwrap(), Geometry::point(1.0, 2.0));
        assert_eq!(parse_wkt("  point(1e0 -2.5)  ").unwrap(), Geometry::point(1.0, -2.5));
    }

    #[test]
    fn parses_linestring() {
        let g = parse_wkt("LINESTRING (0 0, 1 1, 2 0)").unwrap();
        assert_eq!(g.segments().len(), 2);
    }

    #[test]
    fn unbalanced_parens_is_syntax_error() {
        let err = parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 0)").unwrap_err();
        assert!(matches!(err, WktError::Syntax { pos: 29, .. }), "{err:?}");
    }

    #[test]
    fn open_ring_is_invalid() {
        let err = parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 1))").unwrap_err();
        assert!(matches!(err, WktError::Invalid(_)));
    }

    #[test]
    fn rejects_unsupported_and_garbage() {
        assert!(matches!(
            parse_wkt("MULTIPOINT ((1 2))"),
            Err(WktError::Syntax { pos: 0, .. })
        ));
        assert!(parse_wkt("POINT (1)").is_err());
        assert!(parse_wkt("POINT (1 2) x").is_err());
        assert!(parse_wkt("POINT (nan 2)").is_err());
        assert!(parse_wkt("LINESTRING (0 0)").is_err());
    }
}
