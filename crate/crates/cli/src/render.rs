//! SVG frames of a trace: robots as dots, the circles of the current class
//! as strokes, sector radii dashed, movement arrows for active robots.

use svg::node::element::{Circle as SvgCircle, Definitions, Group, Line, Marker, Path, Rectangle, Text};
use svg::node::element::path::Data;
use svg::Document;

use cfp_core::classifier::ConfigClass;
use cfp_core::geometry::{Circle, Point};
use cfp_core::io::TraceFile;
use cfp_core::{classify, Configuration};

struct Overlay {
    circles: Vec<Circle>,
    spokes: Vec<(Point, Point)>,
    label: String,
}

fn overlay(c: &Configuration) -> Overlay {
    let class = classify(c);
    let label = class.label().to_string();
    match class {
        ConfigClass::RegularNGon { circle, .. } => Overlay {
            circles: vec![circle],
            spokes: vec![],
            label,
        },
        ConfigClass::StrictBiangular(b) => Overlay {
            circles: vec![b.circle],
            spokes: vec![],
            label,
        },
        ConfigClass::QuasiAligned(q) | ConfigClass::QuasiArbitrary(q) => Overlay {
            circles: vec![q.pair.outer, q.pair.inner],
            spokes: q
                .pair
                .on_outer
                .iter()
                .map(|&r| (q.pair.center(), c.position(r)))
                .collect(),
            label,
        },
        ConfigClass::Arbitrary => Overlay {
            circles: vec![],
            spokes: vec![],
            label,
        },
    }
}

#[derive(Clone, Copy)]
struct Bounds {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Bounds {
    fn new() -> Self {
        Bounds {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, p: Point, pad: f64) {
        self.min_x = self.min_x.min(p.x - pad);
        self.min_y = self.min_y.min(p.y - pad);
        self.max_x = self.max_x.max(p.x + pad);
        self.max_y = self.max_y.max(p.y + pad);
    }
}

/// One frame per step showing the configuration before it, plus a final
/// frame of the last configuration.
pub fn frames(trace: &TraceFile) -> Vec<Document> {
    let configs: Vec<&Configuration> = (0..=trace.steps.len()).map(|i| trace.before(i)).collect();
    let overlays: Vec<Overlay> = configs.iter().map(|c| overlay(c)).collect();
    let mut b = Bounds::new();
    for (c, o) in configs.iter().zip(&overlays) {
        for &p in c.positions() {
            b.add(p, 0.0);
        }
        for k in &o.circles {
            b.add(k.center, k.radius);
        }
    }
    for s in &trace.steps {
        for &(_, p) in &s.targets {
            b.add(p, 0.0);
        }
    }
    let extent = (b.max_x - b.min_x).max(b.max_y - b.min_y).max(1e-9);
    let margin = 0.08 * extent;
    let unit = extent / 300.0;
    (0..configs.len())
        .map(|i| {
            let step = trace.steps.get(i);
            frame(i, configs[i], &overlays[i], step.map(|s| (&s.active[..], &s.targets[..])), b, margin, unit)
        })
        .collect()
}

type Moves<'a> = (&'a [usize], &'a [(usize, Point)]);

fn frame(
    index: usize,
    config: &Configuration,
    overlay: &Overlay,
    moves: Option<Moves<'_>>,
    b: Bounds,
    margin: f64,
    unit: f64,
) -> Document {
    let (x0, y0) = (b.min_x - margin, -(b.max_y + margin));
    let (w, h) = (b.max_x - b.min_x + 2.0 * margin, b.max_y - b.min_y + 2.0 * margin);
    let arrow = Marker::new()
        .set("id", "arrow")
        .set("viewBox", "0 0 10 10")
        .set("refX", 9)
        .set("refY", 5)
        .set("markerWidth", 6)
        .set("markerHeight", 6)
        .set("orient", "auto")
        .add(Path::new().set("d", Data::new().move_to((0, 0)).line_to((10, 5)).line_to((0, 10)).close()).set("fill", "#c0392b"));

    // world coordinates: y up
    let mut world = Group::new().set("transform", "scale(1,-1)");
    for k in &overlay.circles {
        world = world.add(
            SvgCircle::new()
                .set("cx", k.center.x)
                .set("cy", k.center.y)
                .set("r", k.radius)
                .set("fill", "none")
                .set("stroke", "#7f8c8d")
                .set("stroke-width", unit),
        );
    }
    for &(a, p) in &overlay.spokes {
        world = world.add(
            Line::new()
                .set("x1", a.x)
                .set("y1", a.y)
                .set("x2", p.x)
                .set("y2", p.y)
                .set("stroke", "#95a5a6")
                .set("stroke-width", unit * 0.7)
                .set("stroke-dasharray", format!("{} {}", 4.0 * unit, 3.0 * unit)),
        );
    }
    let active: &[usize] = moves.map_or(&[], |m| m.0);
    if let Some((_, targets)) = moves {
        for &(r, t) in targets {
            let p = config.position(r);
            if p.dist(t) <= unit * 1e-3 {
                continue;
            }
            world = world.add(
                Line::new()
                    .set("x1", p.x)
                    .set("y1", p.y)
                    .set("x2", t.x)
                    .set("y2", t.y)
                    .set("stroke", "#c0392b")
                    .set("stroke-width", unit)
                    .set("marker-end", "url(#arrow)"),
            );
        }
    }
    for (r, p) in config.positions().iter().enumerate() {
        let fill = if active.contains(&r) { "#c0392b" } else { "#2c3e50" };
        world = world.add(
            SvgCircle::new()
                .set("cx", p.x)
                .set("cy", p.y)
                .set("r", 3.0 * unit)
                .set("fill", fill),
        );
    }
    let title = Text::new(format!("step {index}: {} (n={})", overlay.label, config.len()))
        .set("x", x0 + margin * 0.3)
        .set("y", y0 + margin * 0.6)
        .set("font-size", 10.0 * unit)
        .set("font-family", "sans-serif");
    Document::new()
        .set("version", "1.1")
        .set("viewBox", (x0, y0, w, h))
        .set("width", 600)
        .set("height", 600.0 * h / w)
        .add(Definitions::new().add(arrow))
        .add(Rectangle::new().set("x", x0).set("y", y0).set("width", w).set("height", h).set("fill", "white"))
        .add(world)
        .add(title)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfp_core::io::{read_trace, trace_to_string};
    use cfp_core::simulator::SchedulerPolicy;
    use cfp_core::sweep::{ExperimentSpec, InitialClass};
    use cfp_core::ExactAngle;

    fn trace(initial: InitialClass, n: usize, policy: SchedulerPolicy) -> TraceFile {
        let spec = ExperimentSpec::new(n, initial, policy, 1, 500);
        let t = spec.run().unwrap();
        read_trace(trace_to_string(Some(&spec), &t).as_bytes()).unwrap()
    }

    #[test]
    fn one_step_bq_gives_two_frames() {
        let t = trace(
            InitialClass::StrictBiangular {
                alpha: ExactAngle::pi_fraction(1, 10),
            },
            10,
            SchedulerPolicy::Synchronous,
        );
        let f = frames(&t);
        assert_eq!(f.len(), 2);
        let first = f[0].to_string();
        assert_eq!(first.matches("marker-end").count(), 10);
        assert!(first.contains("StrictBiangular"));
        assert!(f[1].to_string().contains("RegularNGon"));
    }

    #[test]
    fn terminal_start_is_a_single_frame() {
        let t = trace(InitialClass::Regular, 12, SchedulerPolicy::Synchronous);
        assert!(t.steps.is_empty());
        assert_eq!(frames(&t).len(), 1);
    }

    #[test]
    fn quasi_frames_draw_sector_radii() {
        let t = trace(InitialClass::QuasiArbitrary { seed: 4 }, 16, SchedulerPolicy::RoundRobin { block: 1 });
        let k = match classify(&t.initial) {
            ConfigClass::QuasiArbitrary(q) => q.k,
            other => panic!("{}", other.label()),
        };
        assert_eq!(frames(&t)[0].to_string().matches("stroke-dasharray").count(), k);
    }
}
