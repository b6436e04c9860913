//! SVG scenes in the Poincaré disc.
//!
//! The disc is drawn centred in a square `N × N` viewBox with radius `0.48 N`,
//! `y` pointing up. Hyperplanes are whole circles clipped to the disc; the
//! visibility region is a polygon through the visible points of a ray profile.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{euclid_radius, Direction, LambdaHyperplane};
use crate::sampler::ProcessSample;
use crate::visibility::{equiangular_rays, visibility_profile, VisibilityProfile};

/// Tolerance on `|cos θ - λ|` for emitted hyperplane circles.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub canvas_px: u32,
    pub n_boundary_rays: usize,
    pub show_region: bool,
    pub stroke_width_px: f64,
    pub hyperplane_color: String,
    pub region_color: String,
    pub region_opacity: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            canvas_px: 1000,
            n_boundary_rays: 720,
            show_region: true,
            stroke_width_px: 1.0,
            hyperplane_color: "black".into(),
            region_color: "red".into(),
            region_opacity: 0.6,
        }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        if self.canvas_px < 100 {
            return Err(domain(format!(
                "canvas must be at least 100 px, got {}",
                self.canvas_px
            )));
        }
        if self.n_boundary_rays < 16 {
            return Err(domain(format!(
                "need at least 16 boundary rays, got {}",
                self.n_boundary_rays
            )));
        }
        if !(self.stroke_width_px > 0.0) {
            return Err(domain("stroke width must be positive"));
        }
        Ok(())
    }
}

/// `cos` of the angle at which a circle with centre at distance `center_norm`
/// from the origin and radius `radius` meets the unit circle.
pub fn boundary_cos_angle(center_norm: f64, radius: f64) -> f64 {
    (1.0 + radius * radius - center_norm * center_norm) / (2.0 * radius)
}

/// Same quantity from the model parameters, free of cancellation.
fn model_cos_angle(lambda: f64, r: f64) -> Result<f64> {
    let big_r = euclid_radius(lambda, r)?;
    // 1 + R² - (r + R)² = 1 - r² - 2rR
    Ok(((1.0 - r) * (1.0 + r) - 2.0 * r * big_r) / (2.0 * big_r))
}

struct Canvas {
    half: f64,
    scale: f64,
}

impl Canvas {
    fn new(n: u32) -> Self {
        let n = n as f64;
        Self {
            half: 0.5 * n,
            scale: 0.48 * n,
        }
    }

    fn x(&self, x: f64) -> f64 {
        self.half + self.scale * x
    }

    fn y(&self, y: f64) -> f64 {
        self.half - self.scale * y
    }
}

fn hyperplane_element(out: &mut String, hp: &LambdaHyperplane, canvas: &Canvas) -> Result<()> {
    let u = hp.u.coords();
    if hp.is_flat() {
        // Diameter orthogonal to u, long enough to cross the clip disc.
        let (tx, ty) = (-u[1], u[0]);
        let reach = 1.05;
        writeln!(
            out,
            r#"<line class="hyperplane" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            canvas.x(-reach * tx),
            canvas.y(-reach * ty),
            canvas.x(reach * tx),
            canvas.y(reach * ty)
        )
        .expect("write to string");
        return Ok(());
    }
    let cos = model_cos_angle(hp.lambda, hp.r)?;
    if (cos - hp.lambda).abs() > ANGLE_TOL {
        return Err(domain(format!(
            "hyperplane at r = {} meets the boundary with cos = {cos}, expected {}",
            hp.r, hp.lambda
        )));
    }
    let big_r = euclid_radius(hp.lambda, hp.r)?;
    let c = hp.r + big_r;
    writeln!(
        out,
        r#"<circle class="hyperplane" cx="{}" cy="{}" r="{}"/>"#,
        canvas.x(c * u[0]),
        canvas.y(c * u[1]),
        canvas.scale * big_r
    )
    .expect("write to string");
    Ok(())
}

/// Renders `sample` and, when `opts.show_region`, the polygon through the
/// visible points of `profile`.
pub fn render_disc_svg(sample: &ProcessSample, profile: &VisibilityProfile, opts: &RenderOptions) -> Result<String> {
    if sample.config.d != 2 {
        return Err(Error::Unsupported(format!(
            "rendering needs d = 2, got d = {}",
            sample.config.d
        )));
    }
    opts.validate()?;
    if profile.directions.len() != profile.distances.len() {
        return Err(domain("profile directions and distances differ in length"));
    }
    if profile.directions.iter().any(|u| u.dim() != 2) {
        return Err(Error::Unsupported("profile rays must be planar".into()));
    }
    let n = opts.canvas_px;
    let canvas = Canvas::new(n);
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).expect("write to string");
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{n}" height="{n}" viewBox="0 0 {n} {n}">"#
    )
    .expect("write to string");
    writeln!(
        out,
        r#"<defs><clipPath id="disc"><circle cx="{}" cy="{}" r="{}"/></clipPath></defs>"#,
        canvas.half, canvas.half, canvas.scale
    )
    .expect("write to string");
    writeln!(out, r#"<rect width="{n}" height="{n}" fill="white"/>"#).expect("write to string");
    writeln!(out, r#"<g clip-path="url(#disc)">"#).expect("write to string");

    if opts.show_region && !profile.directions.is_empty() {
        let mut points = String::new();
        for (k, (u, &dist)) in profile.directions.iter().zip(&profile.distances).enumerate() {
            let rho = (0.5 * dist).tanh();
            let p = u.coords();
            if k > 0 {
                points.push(' ');
            }
            write!(points, "{},{}", canvas.x(rho * p[0]), canvas.y(rho * p[1])).expect("write to string");
        }
        writeln!(
            out,
            r#"<polygon class="visibility" points="{points}" fill="{}" fill-opacity="{}" stroke="none"/>"#,
            opts.region_color, opts.region_opacity
        )
        .expect("write to string");
    }

    writeln!(
        out,
        r#"<g fill="none" stroke="{}" stroke-width="{}">"#,
        opts.hyperplane_color, opts.stroke_width_px
    )
    .expect("write to string");
    for hp in sample.hyperplanes() {
        hyperplane_element(&mut out, &hp, &canvas)?;
    }
    writeln!(out, "</g>\n</g>").expect("write to string");
    writeln!(
        out,
        r#"<circle class="boundary" cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        canvas.half, canvas.half, canvas.scale, opts.stroke_width_px
    )
    .expect("write to string");
    writeln!(out, "</svg>").expect("write to string");
    Ok(out)
}

/// Renders `sample` with a profile on `opts.n_boundary_rays` equiangular rays.
pub fn render_scene(sample: &ProcessSample, opts: &RenderOptions) -> Result<String> {
    if sample.config.d != 2 {
        return Err(Error::Unsupported(format!(
            "rendering needs d = 2, got d = {}",
            sample.config.d
        )));
    }
    opts.validate()?;
    let rays: Vec<Direction> = equiangular_rays(opts.n_boundary_rays);
    let profile = visibility_profile(sample, &rays)?;
    render_disc_svg(sample, &profile, opts)
}
