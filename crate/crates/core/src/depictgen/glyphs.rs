//! Built-in stroke font. Glyphs are polylines on a grid where the cap
//! height runs from y = 0 (top) to y = 6 (baseline) and descenders reach 8.

pub struct Glyph {
    pub advance: f64,
    pub strokes: Vec<Vec<(f64, f64)>>,
}

fn def(c: char) -> Option<(f64, &'static str)> {
    Some(match c {
        'A' => (4.0, "0,6 2,0 4,6;1,4 3,4"),
        'B' => (4.0, "0,0 0,6 3,6 4,5 4,4 3,3 0,3;0,0 3,0 4,1 4,2 3,3"),
        'C' => (4.0, "4,1 3,0 1,0 0,1 0,5 1,6 3,6 4,5"),
        'D' => (4.0, "0,0 0,6 2,6 4,4 4,2 2,0 0,0"),
        'E' => (4.0, "4,0 0,0 0,6 4,6;0,3 3,3"),
        'F' => (4.0, "4,0 0,0 0,6;0,3 3,3"),
        'G' => (4.0, "4,1 3,0 1,0 0,1 0,5 1,6 3,6 4,5 4,3 2,3"),
        'H' => (4.0, "0,0 0,6;4,0 4,6;0,3 4,3"),
        'I' => (2.0, "0,0 2,0;1,0 1,6;0,6 2,6"),
        'J' => (4.0, "4,0 4,5 3,6 1,6 0,5"),
        'K' => (4.0, "0,0 0,6;4,0 0,4;1,3 4,6"),
        'L' => (4.0, "0,0 0,6 4,6"),
        'M' => (4.0, "0,6 0,0 2,3 4,0 4,6"),
        'N' => (4.0, "0,6 0,0 4,6 4,0"),
        'O' => (4.0, "1,0 3,0 4,1 4,5 3,6 1,6 0,5 0,1 1,0"),
        'P' => (4.0, "0,6 0,0 3,0 4,1 4,2 3,3 0,3"),
        'Q' => (4.0, "1,0 3,0 4,1 4,5 3,6 1,6 0,5 0,1 1,0;2,4 4,6"),
        'R' => (4.0, "0,6 0,0 3,0 4,1 4,2 3,3 0,3;2,3 4,6"),
        'S' => (4.0, "4,1 3,0 1,0 0,1 0,2 1,3 3,3 4,4 4,5 3,6 1,6 0,5"),
        'T' => (4.0, "0,0 4,0;2,0 2,6"),
        'U' => (4.0, "0,0 0,5 1,6 3,6 4,5 4,0"),
        'V' => (4.0, "0,0 2,6 4,0"),
        'W' => (4.0, "0,0 1,6 2,3 3,6 4,0"),
        'X' => (4.0, "0,0 4,6;4,0 0,6"),
        'Y' => (4.0, "0,0 2,3 4,0;2,3 2,6"),
        'Z' => (4.0, "0,0 4,0 0,6 4,6"),
        'a' => (3.0, "0,2 2,2 3,3 3,6;3,4 1,4 0,5 1,6 3,6"),
        'b' => (3.0, "0,0 0,6 2,6 3,5 3,3 2,2 0,2"),
        'c' => (3.0, "3,2 1,2 0,3 0,5 1,6 3,6"),
        'd' => (3.0, "3,0 3,6 1,6 0,5 0,3 1,2 3,2"),
        'e' => (3.0, "0,4 3,4 3,3 2,2 1,2 0,3 0,5 1,6 3,6"),
        'f' => (3.0, "3,0 2,0 1,1 1,6;0,2 3,2"),
        'g' => (3.0, "3,2 3,7 2,8 0,8;3,2 1,2 0,3 0,5 1,6 3,6"),
        'h' => (3.0, "0,0 0,6;0,3 1,2 2,2 3,3 3,6"),
        'i' => (1.0, "0.5,2 0.5,6;0.5,0.5 0.5,1"),
        'j' => (2.0, "2,2 2,7 1,8 0,8;2,0.5 2,1"),
        'k' => (3.0, "0,0 0,6;3,2 0,5;1,4 3,6"),
        'l' => (1.0, "0.5,0 0.5,6"),
        'm' => (4.0, "0,6 0,2;0,3 1,2 2,3 2,6;2,3 3,2 4,3 4,6"),
        'n' => (3.0, "0,6 0,2;0,3 1,2 2,2 3,3 3,6"),
        'o' => (3.0, "1,2 2,2 3,3 3,5 2,6 1,6 0,5 0,3 1,2"),
        'p' => (3.0, "0,2 0,8;0,2 2,2 3,3 3,5 2,6 0,6"),
        'q' => (3.0, "3,2 3,8;3,2 1,2 0,3 0,5 1,6 3,6"),
        'r' => (3.0, "0,2 0,6;0,3 1,2 3,2"),
        's' => (3.0, "3,2 1,2 0,3 1,4 2,4 3,5 2,6 0,6"),
        't' => (3.0, "1,0 1,5 2,6 3,6;0,2 3,2"),
        'u' => (3.0, "0,2 0,5 1,6 2,6 3,5;3,2 3,6"),
        'v' => (3.0, "0,2 1.5,6 3,2"),
        'w' => (4.0, "0,2 1,6 2,3 3,6 4,2"),
        'x' => (3.0, "0,2 3,6;3,2 0,6"),
        'y' => (3.0, "0,2 1.5,6;3,2 1,8"),
        'z' => (3.0, "0,2 3,2 0,6 3,6"),
        '0' => (3.0, "1,0 2,0 3,1 3,5 2,6 1,6 0,5 0,1 1,0"),
        '1' => (2.0, "0,1 1,0 1,6;0,6 2,6"),
        '2' => (3.0, "0,1 1,0 2,0 3,1 3,2 0,6 3,6"),
        '3' => (3.0, "0,0 3,0 1,2 2,2 3,3 3,5 2,6 0,6"),
        '4' => (3.0, "2,6 2,0 0,4 3,4"),
        '5' => (3.0, "3,0 0,0 0,3 2,3 3,4 3,5 2,6 0,6"),
        '6' => (3.0, "3,0 1,0 0,1 0,5 1,6 2,6 3,5 3,4 2,3 0,3"),
        '7' => (3.0, "0,0 3,0 1,6"),
        '8' => (
            3.0,
            "1,3 0,2 0,1 1,0 2,0 3,1 3,2 2,3 1,3 0,4 0,5 1,6 2,6 3,5 3,4 2,3",
        ),
        '9' => (3.0, "3,3 1,3 0,2 0,1 1,0 2,0 3,1 3,5 2,6 0,6"),
        '+' => (3.0, "0,3 3,3;1.5,1.5 1.5,4.5"),
        '-' => (3.0, "0,3 3,3"),
        '=' => (3.0, "0,2 3,2;0,4 3,4"),
        '\u{2261}' => (3.0, "0,2 3,2;0,3 3,3;0,4 3,4"),
        '(' => (2.0, "2,0 1,1 1,5 2,6"),
        ')' => (2.0, "0,0 1,1 1,5 0,6"),
        '*' => (3.0, "1.5,1 1.5,5;0,2 3,4;0,4 3,2"),
        _ => return None,
    })
}

fn parse(s: &str) -> Vec<Vec<(f64, f64)>> {
    s.split(';')
        .map(|line| {
            line.split_whitespace()
                .map(|pt| {
                    let (x, y) = pt.split_once(',').expect("glyph point");
                    (x.parse().expect("glyph x"), y.parse().expect("glyph y"))
                })
                .collect()
        })
        .collect()
}

/// The glyph for `c`; unknown characters become an open box.
pub fn glyph(c: char) -> Glyph {
    match def(c) {
        Some((advance, s)) => Glyph {
            advance,
            strokes: parse(s),
        },
        None => Glyph {
            advance: 3.0,
            strokes: parse("0,0 3,0 3,6 0,6 0,0"),
        },
    }
}

pub fn has_glyph(c: char) -> bool {
    def(c).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_defined_glyph_parses_inside_its_cell() {
        let chars = ('A'..='Z')
            .chain('a'..='z')
            .chain('0'..='9')
            .chain("+-=()*\u{2261}".chars());
        for c in chars {
            assert!(has_glyph(c), "{c}");
            let g = glyph(c);
            for s in &g.strokes {
                assert!(!s.is_empty());
                for &(x, y) in s {
                    assert!(
                        (0.0..=g.advance).contains(&x) && (0.0..=8.0).contains(&y),
                        "{c}"
                    );
                }
            }
        }
    }
}
