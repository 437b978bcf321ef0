//! Annular domain, polar grid, boundary frames and quadrature.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spectral::ThetaOps;
use crate::stencil::RadialOps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Inner,
    Outer,
}

/// One boundary circle with its outward frame.
///
/// Frames are stored in Cartesian components; `normal_sign` and
/// `tangent_sign` give the same information relative to `(e_r, e_theta)`.
#[derive(Debug, Clone)]
pub struct BoundaryComponent {
    pub side: Side,
    pub radius: f64,
    pub curvature: f64,
    pub radial_index: usize,
    pub dtheta: f64,
    pub nodes: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
}

impl BoundaryComponent {
    fn new(side: Side, radius: f64, radial_index: usize, thetas: &[f64], dtheta: f64) -> Self {
        let sign = match side {
            Side::Outer => 1.0,
            Side::Inner => -1.0,
        };
        let normals = thetas
            .iter()
            .map(|t| [sign * t.cos(), sign * t.sin()])
            .collect();
        let tangents = thetas
            .iter()
            .map(|t| [-sign * t.sin(), sign * t.cos()])
            .collect();
        Self {
            side,
            radius,
            curvature: sign / radius,
            radial_index,
            dtheta,
            nodes: thetas.to_vec(),
            normals,
            tangents,
        }
    }

    /// `n = normal_sign * e_r`.
    pub fn normal_sign(&self) -> f64 {
        match self.side {
            Side::Outer => 1.0,
            Side::Inner => -1.0,
        }
    }

    /// `tau = tangent_sign * e_theta`.
    pub fn tangent_sign(&self) -> f64 {
        self.normal_sign()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Perimeter weight `radius * dtheta` of every node.
    pub fn weight(&self) -> f64 {
        self.radius * self.dtheta
    }

    pub fn quadrature(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: (1, self.len()),
                got: (1, g.len()),
            });
        }
        Ok(self.weight() * g.iter().sum::<f64>())
    }
}

/// Radial segment joining the two boundary circles at a fixed angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomologyCut {
    pub theta_index: usize,
    pub normal: [f64; 2],
}

impl HomologyCut {
    pub fn new(domain: &AnnulusDomain, theta_index: usize) -> Result<Self> {
        if theta_index >= domain.n_theta {
            return Err(Error::InvalidArgument(format!(
                "cut index {theta_index} outside 0..{}",
                domain.n_theta
            )));
        }
        let t = domain.thetas[theta_index];
        Ok(Self {
            theta_index,
            normal: [-t.sin(), t.cos()],
        })
    }
}

impl Default for HomologyCut {
    fn default() -> Self {
        Self {
            theta_index: 0,
            normal: [0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnulusDomain {
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub dr: f64,
    pub dtheta: f64,
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
    pub inner: BoundaryComponent,
    pub outer: BoundaryComponent,
    pub radial: RadialOps,
    pub theta: ThetaOps,
    area_weights: Vec<f64>,
}

pub fn build_domain(a: f64, b: f64, n_r: usize, n_theta: usize) -> Result<Arc<AnnulusDomain>> {
    AnnulusDomain::new(a, b, n_r, n_theta).map(Arc::new)
}

impl AnnulusDomain {
    pub fn new(a: f64, b: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidDomain("radii must be finite".into()));
        }
        if a <= 0.0 {
            return Err(Error::InvalidDomain("r_inner must be positive".into()));
        }
        if b <= a {
            return Err(Error::InvalidDomain("r_outer must exceed r_inner".into()));
        }
        if n_r < 8 {
            return Err(Error::InvalidDomain(format!("n_r = {n_r} is below 8")));
        }
        if n_theta < 8 || n_theta % 2 != 0 {
            return Err(Error::InvalidDomain(format!(
                "n_theta = {n_theta} must be even and at least 8"
            )));
        }
        let dr = (b - a) / (n_r - 1) as f64;
        let dtheta = 2.0 * PI / n_theta as f64;
        let radii: Vec<f64> = (0..n_r).map(|j| a + j as f64 * dr).collect();
        let thetas: Vec<f64> = (0..n_theta).map(|k| k as f64 * dtheta).collect();
        let radial = RadialOps::new(n_r, dr)?;
        let area_weights = radial
            .weights()
            .iter()
            .zip(&radii)
            .map(|(q, r)| q * r * dtheta)
            .collect();
        Ok(Self {
            r_inner: a,
            r_outer: b,
            n_r,
            n_theta,
            dr,
            dtheta,
            inner: BoundaryComponent::new(Side::Inner, a, 0, &thetas, dtheta),
            outer: BoundaryComponent::new(Side::Outer, b, n_r - 1, &thetas, dtheta),
            radii,
            thetas,
            radial,
            theta: ThetaOps::new(n_theta),
            area_weights,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_r, self.n_theta)
    }

    pub fn component(&self, side: Side) -> &BoundaryComponent {
        match side {
            Side::Inner => &self.inner,
            Side::Outer => &self.outer,
        }
    }

    pub fn components(&self) -> [&BoundaryComponent; 2] {
        [&self.inner, &self.outer]
    }

    /// Area weight of every node in radial row `j`.
    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_outer * self.r_outer - self.r_inner * self.r_inner)
    }

    /// Smallest grid length used by the advective CFL number.
    pub fn min_spacing(&self) -> f64 {
        self.dr.min(self.r_inner * self.dtheta)
    }

    pub fn same_grid(&self, other: &AnnulusDomain) -> bool {
        self.r_inner == other.r_inner
            && self.r_outer == other.r_outer
            && self.n_r == other.n_r
            && self.n_theta == other.n_theta
    }

    pub fn check_shape(&self, f: ArrayView2<f64>) -> Result<()> {
        if f.dim() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                got: f.dim(),
            });
        }
        Ok(())
    }

    /// Area integral of nodal values.
    pub fn integrate(&self, f: ArrayView2<f64>) -> Result<f64> {
        self.check_shape(f)?;
        Ok(f.outer_iter()
            .zip(&self.area_weights)
            .map(|(row, w)| w * row.sum())
            .sum())
    }
}

pub fn area_quadrature(domain: &AnnulusDomain, f: &ScalarField) -> Result<f64> {
    if !domain.same_grid(f.domain()) {
        return Err(Error::ShapeMismatch {
            expected: domain.shape(),
            got: f.domain().shape(),
        });
    }
    domain.integrate(f.values().view())
}

pub fn boundary_quadrature(component: &BoundaryComponent, g: &[f64]) -> Result<f64> {
    component.quadrature(g)
}
