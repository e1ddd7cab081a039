//! Human-readable classification reports.

use std::fmt::Write;

use cfp_core::classifier::{ConfigClass, QuasiDescriptor};
use cfp_core::geometry::{fmt_real, Circle, Magnitude};
use cfp_core::{classify, Configuration, ExactAngle};

fn circle_line(name: &str, c: &Circle, count: Option<usize>) -> String {
    let robots = count.map(|k| format!(" ({k} robots)")).unwrap_or_default();
    format!("{name}: center {} radius {}{robots}\n", c.center, fmt_real(c.radius))
}

fn span_text(span: &Magnitude) -> String {
    match span {
        Magnitude::Exact(t) => ExactAngle::Turns(t.clone()).to_string(),
        Magnitude::Real(t) => fmt_real(t * std::f64::consts::TAU),
    }
}

fn quasi_report(out: &mut String, q: &QuasiDescriptor) {
    let _ = write!(out, "{}", circle_line("C1", &q.pair.outer, Some(q.pair.on_outer.len())));
    let _ = write!(out, "{}", circle_line("C2", &q.pair.inner, Some(q.pair.on_inner.len())));
    let _ = writeln!(out, "{:<8}{:<6}{:<6}{:<10}{:<9}inner", "sector", "B1", "B2", "span", "missing");
    for (i, s) in q.sectors.sectors.iter().enumerate() {
        let inner: Vec<String> = s.inner_robots.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(
            out,
            "{:<8}{:<6}{:<6}{:<10}{:<9}[{}]",
            i,
            s.outer_b1,
            s.outer_b2,
            span_text(&s.span),
            s.missing_count,
            inner.join(", ")
        );
    }
}

/// Class of `config` followed by its supporting structure, in a stable
/// order.
pub fn describe(config: &Configuration) -> String {
    let n = config.len();
    let mut out = String::new();
    match classify(config) {
        ConfigClass::RegularNGon { circle, delta } => {
            let _ = writeln!(out, "RegularNGon n={n} δ={delta}");
            out.push_str(&circle_line("circle", &circle, None));
        }
        ConfigClass::StrictBiangular(b) => {
            let _ = writeln!(out, "StrictBiangular n={n} α={} β={}", b.alpha, b.beta);
            out.push_str(&circle_line("circle", &b.circle, None));
            let (g1, g2) = b.groups();
            let _ = writeln!(out, "G1: {g1:?}");
            let _ = writeln!(out, "G2: {g2:?}");
        }
        ConfigClass::QuasiAligned(q) => {
            let _ = writeln!(out, "QuasiAligned n={n} k={}", q.k);
            quasi_report(&mut out, &q);
        }
        ConfigClass::QuasiArbitrary(q) => {
            let _ = writeln!(out, "QuasiArbitrary n={n} k={}", q.k);
            quasi_report(&mut out, &q);
        }
        ConfigClass::Arbitrary => {
            let _ = writeln!(out, "Arbitrary n={n}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfp_core::generate;
    use cfp_core::rat;

    #[test]
    fn regular_header() {
        let c = generate::regular(12, rat(1, 1)).unwrap();
        assert!(describe(&c).starts_with("RegularNGon n=12 δ=π/6\n"));
    }

    #[test]
    fn quasi_table_lists_every_sector() {
        let c = generate::quasi16_arbitrary().build().unwrap();
        let text = describe(&c);
        assert!(text.starts_with("QuasiArbitrary n=16 k=12\n"), "{text}");
        // header line, two circles, column titles, one row per sector
        assert_eq!(text.lines().count(), 4 + 12);
    }
}
