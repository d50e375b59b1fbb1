//! Levi-Civita curvature pipeline from a metric jet.
//!
//! Convention: `R(x,y,z,u) = g(R(x,y)z, u)` with
//! `R(x,y) = ∇_x∇_y - ∇_y∇_x - ∇_[x,y]`, so that
//! `R(x,y,y,x) / π₁(x,y,y,x) = +1` on the unit sphere.

use serde::Serialize;

use super::{check_nondegenerate, DerivativePath, MetricChart, MetricJet};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::tensor::{contract_ricci, weyl_from, SymmetricBilinear, Tensor3, Tensor4, Tensor5};

/// Curvature data at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBundle<S> {
    pub point: Vec<S>,
    pub metric: SymmetricBilinear<S>,
    pub metric_inv: SymmetricBilinear<S>,
    /// `Γ^i_{jk}` stored `[i][j][k]`.
    pub christoffel: Tensor3<S>,
    pub riemann: Tensor4<S>,
    pub ricci: SymmetricBilinear<S>,
    pub scalar: S,
    /// Present for `n >= 4`.
    pub weyl: Option<Tensor4<S>>,
    /// `(∇_X A)(Y,Z) - (∇_Y A)(X,Z)` with `A = S - τ/(2(n-1)) g`; present for `n = 3`.
    pub cotton: Option<Tensor3<S>>,
    /// `P = S - τ/n g`.
    pub traceless_ricci: SymmetricBilinear<S>,
    pub path: DerivativePath,
}

impl<S: Scalar> CurvatureBundle<S> {
    /// Max-norm of the conformal-flatness witness (Weyl for n ≥ 4, Cotton for n = 3).
    pub fn conformal_obstruction(&self) -> Option<S> {
        self.weyl
            .as_ref()
            .map(|w| w.max_abs())
            .or_else(|| self.cotton.as_ref().map(|c| c.max_abs()))
    }
}

/// Intermediate connection data.
struct Connection<S> {
    n: usize,
    ginv: Vec<S>,
    dginv: Vec<S>,
    gamma: Vec<S>,
    dgamma: Vec<S>,
    ddgamma: Vec<S>,
}

impl<S: Scalar> Connection<S> {
    #[inline]
    fn gamma(&self, i: usize, j: usize, k: usize) -> S {
        let n = self.n;
        self.gamma[(i * n + j) * n + k]
    }
    /// `∂_m Γ^i_{jk}`
    #[inline]
    fn dgamma(&self, m: usize, i: usize, j: usize, k: usize) -> S {
        let n = self.n;
        self.dgamma[((m * n + i) * n + j) * n + k]
    }
    /// `∂_m ∂_p Γ^i_{jk}`
    #[inline]
    fn ddgamma(&self, m: usize, p: usize, i: usize, j: usize, k: usize) -> S {
        let n = self.n;
        self.ddgamma[(((m * n + p) * n + i) * n + j) * n + k]
    }

    fn build(jet: &MetricJet<S>, ginv: &SymmetricBilinear<S>) -> Self {
        let n = jet.dim;
        let half = S::lit(0.5);
        let gi = ginv.as_slice().to_vec();
        let at = |m: &[S], i: usize, j: usize| m[i * n + j];

        // Γ_{l,jk} and its derivatives (first kind)
        let first = |l: usize, j: usize, k: usize| half * (jet.d1(j, l, k) + jet.d1(k, l, j) - jet.d1(l, j, k));
        let dfirst = |m: usize, l: usize, j: usize, k: usize| {
            half * (jet.d2(m, j, l, k) + jet.d2(m, k, l, j) - jet.d2(m, l, j, k))
        };
        let ddfirst = |m: usize, p: usize, l: usize, j: usize, k: usize| {
            half * (jet.d3(m, p, j, l, k) + jet.d3(m, p, k, l, j) - jet.d3(m, p, l, j, k))
        };

        // ∂_m g^{ij} = -g^{ia} ∂_m g_ab g^{bj}
        let mut dginv = vec![S::zero(); n * n * n];
        if jet.order >= 1 {
            for m in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = S::zero();
                        for a in 0..n {
                            for b in 0..n {
                                acc += at(&gi, i, a) * jet.d1(m, a, b) * at(&gi, b, j);
                            }
                        }
                        dginv[(m * n + i) * n + j] = -acc;
                    }
                }
            }
        }
        let dgi = |m: usize, i: usize, j: usize| dginv[(m * n + i) * n + j];

        let mut gamma = vec![S::zero(); n * n * n];
        if jet.order >= 1 {
            for i in 0..n {
                for j in 0..n {
                    for k in j..n {
                        let mut acc = S::zero();
                        for l in 0..n {
                            acc += at(&gi, i, l) * first(l, j, k);
                        }
                        gamma[(i * n + j) * n + k] = acc;
                        gamma[(i * n + k) * n + j] = acc;
                    }
                }
            }
        }

        let mut dgamma = Vec::new();
        if jet.order >= 2 {
            dgamma = vec![S::zero(); n.pow(4)];
            for m in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in j..n {
                            let mut acc = S::zero();
                            for l in 0..n {
                                acc += dgi(m, i, l) * first(l, j, k) + at(&gi, i, l) * dfirst(m, l, j, k);
                            }
                            dgamma[((m * n + i) * n + j) * n + k] = acc;
                            dgamma[((m * n + i) * n + k) * n + j] = acc;
                        }
                    }
                }
            }
        }

        let mut ddgamma = Vec::new();
        if jet.order >= 3 {
            // ∂_m∂_p g^{ij} = -(∂_p g^{ia} ∂_m g_ab g^{bj} + g^{ia} ∂_mp g_ab g^{bj} + g^{ia} ∂_m g_ab ∂_p g^{bj})
            let mut ddginv = vec![S::zero(); n.pow(4)];
            for m in 0..n {
                for p in m..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut acc = S::zero();
                            for a in 0..n {
                                for b in 0..n {
                                    acc += dgi(p, i, a) * jet.d1(m, a, b) * at(&gi, b, j)
                                        + at(&gi, i, a) * jet.d2(m, p, a, b) * at(&gi, b, j)
                                        + at(&gi, i, a) * jet.d1(m, a, b) * dgi(p, b, j);
                                }
                            }
                            ddginv[((m * n + p) * n + i) * n + j] = -acc;
                            ddginv[((p * n + m) * n + i) * n + j] = -acc;
                        }
                    }
                }
            }
            let ddgi = |m: usize, p: usize, i: usize, j: usize| ddginv[((m * n + p) * n + i) * n + j];
            ddgamma = vec![S::zero(); n.pow(5)];
            for m in 0..n {
                for p in m..n {
                    for i in 0..n {
                        for j in 0..n {
                            for k in j..n {
                                let mut acc = S::zero();
                                for l in 0..n {
                                    acc += ddgi(m, p, i, l) * first(l, j, k)
                                        + dgi(m, i, l) * dfirst(p, l, j, k)
                                        + dgi(p, i, l) * dfirst(m, l, j, k)
                                        + at(&gi, i, l) * ddfirst(m, p, l, j, k);
                                }
                                for (a, b) in [(m, p), (p, m)] {
                                    ddgamma[(((a * n + b) * n + i) * n + j) * n + k] = acc;
                                    ddgamma[(((a * n + b) * n + i) * n + k) * n + j] = acc;
                                }
                            }
                        }
                    }
                }
            }
        }

        Connection {
            n,
            ginv: gi,
            dginv,
            gamma,
            dgamma,
            ddgamma,
        }
    }

    /// `Rm^ρ_{cab} = ∂_aΓ^ρ_{bc} - ∂_bΓ^ρ_{ac} + Γ^ρ_{aλ}Γ^λ_{bc} - Γ^ρ_{bλ}Γ^λ_{ac}`, stored `[ρ][c][a][b]`.
    fn mixed_riemann(&self) -> Vec<S> {
        let n = self.n;
        let mut out = vec![S::zero(); n.pow(4)];
        for r in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in (a + 1)..n {
                        let mut v = self.dgamma(a, r, b, c) - self.dgamma(b, r, a, c);
                        for l in 0..n {
                            v += self.gamma(r, a, l) * self.gamma(l, b, c) - self.gamma(r, b, l) * self.gamma(l, a, c);
                        }
                        out[((r * n + c) * n + a) * n + b] = v;
                        out[((r * n + c) * n + b) * n + a] = -v;
                    }
                }
            }
        }
        out
    }

    /// `∂_e Rm^ρ_{cab}`, stored `[e][ρ][c][a][b]`.
    fn d_mixed_riemann(&self) -> Vec<S> {
        let n = self.n;
        let mut out = vec![S::zero(); n.pow(5)];
        for e in 0..n {
            for r in 0..n {
                for c in 0..n {
                    for a in 0..n {
                        for b in (a + 1)..n {
                            let mut v = self.ddgamma(e, a, r, b, c) - self.ddgamma(e, b, r, a, c);
                            for l in 0..n {
                                v += self.dgamma(e, r, a, l) * self.gamma(l, b, c)
                                    + self.gamma(r, a, l) * self.dgamma(e, l, b, c)
                                    - self.dgamma(e, r, b, l) * self.gamma(l, a, c)
                                    - self.gamma(r, b, l) * self.dgamma(e, l, a, c);
                            }
                            out[(((e * n + r) * n + c) * n + a) * n + b] = v;
                            out[(((e * n + r) * n + c) * n + b) * n + a] = -v;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Lowers `Rm^ρ_{cab}` to `R_{abcd} = g_{dρ} Rm^ρ_{cab}` and symmetrizes the pair
/// structure to remove rounding asymmetry.
fn lower_riemann<S: Scalar>(jet: &MetricJet<S>, mixed: &[S]) -> Tensor4<S> {
    let n = jet.dim;
    let raw = Tensor4::from_fn(n, |a, b, c, d| {
        let mut acc = S::zero();
        for r in 0..n {
            acc += jet.g(d, r) * mixed[((r * n + c) * n + a) * n + b];
        }
        acc
    });
    symmetrize_curvature(&raw)
}

/// Projection onto the pair-exchange and antisymmetric parts, `(R_{abcd} + R_{cdab})/2`
/// with enforced antisymmetry in each pair.
fn symmetrize_curvature<S: Scalar>(t: &Tensor4<S>) -> Tensor4<S> {
    let q = S::lit(0.125);
    Tensor4::from_fn(t.dim(), |a, b, c, d| {
        q * (t.get(a, b, c, d) - t.get(b, a, c, d) - t.get(a, b, d, c) + t.get(b, a, d, c) + t.get(c, d, a, b)
            - t.get(d, c, a, b)
            - t.get(c, d, b, a)
            + t.get(d, c, b, a))
    })
}

fn covariant_derivative_from<S: Scalar>(jet: &MetricJet<S>, conn: &Connection<S>, riemann: &Tensor4<S>) -> Tensor5<S> {
    let n = jet.dim;
    let mixed = conn.mixed_riemann();
    let dmixed = conn.d_mixed_riemann();
    let mut out = Tensor5::zeros(n);
    for e in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        // ∂_e R_{abcd}
                        let mut v = S::zero();
                        for r in 0..n {
                            v += jet.d1(e, d, r) * mixed[((r * n + c) * n + a) * n + b]
                                + jet.g(d, r) * dmixed[(((e * n + r) * n + c) * n + a) * n + b];
                        }
                        for l in 0..n {
                            v -= conn.gamma(l, e, a) * riemann.get(l, b, c, d)
                                + conn.gamma(l, e, b) * riemann.get(a, l, c, d)
                                + conn.gamma(l, e, c) * riemann.get(a, b, l, d)
                                + conn.gamma(l, e, d) * riemann.get(a, b, c, l);
                        }
                        out.set(e, a, b, c, d, v);
                    }
                }
            }
        }
    }
    out
}

/// Full curvature data at `p`.
pub fn curvature_bundle<S: Scalar>(chart: &MetricChart<S>, p: &[S]) -> Result<CurvatureBundle<S>> {
    let n = chart.dim();
    let order = if n == 3 { 3 } else { 2 };
    let jet = chart.jet(p, order)?;
    let g = SymmetricBilinear::from_matrix(n, &jet.g, S::lit(1e-12))?;
    check_nondegenerate(&g)?;
    let ginv = g.inverse()?;
    let conn = Connection::build(&jet, &ginv);
    let riemann = lower_riemann(&jet, &conn.mixed_riemann());
    let (ricci, scalar) = contract_ricci(&riemann, &ginv)?;
    let nf = S::lit(n as f64);
    let traceless_ricci = ricci.add_scaled(-scalar / nf, &g)?;
    let weyl = if n >= 4 {
        Some(weyl_from(&riemann, &g, &ricci, scalar)?)
    } else {
        None
    };
    let cotton = if n == 3 {
        let nabla = covariant_derivative_from(&jet, &conn, &riemann);
        Some(cotton_from(&nabla, &g, &ginv))
    } else {
        None
    };
    let christoffel = Tensor3::from_values(n, conn.gamma.clone())?;
    let _ = (&conn.ginv, &conn.dginv);
    Ok(CurvatureBundle {
        point: p.to_vec(),
        metric: g,
        metric_inv: ginv,
        christoffel,
        riemann,
        ricci,
        scalar,
        weyl,
        cotton,
        traceless_ricci,
        path: chart.path(),
    })
}

fn cotton_from<S: Scalar>(nabla: &Tensor5<S>, g: &SymmetricBilinear<S>, ginv: &SymmetricBilinear<S>) -> Tensor3<S> {
    let n = g.dim();
    // (∇_e S)_{yz} = g^{ik} (∇_e R)_{iyzk}
    let mut ds = vec![S::zero(); n * n * n];
    for e in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut acc = S::zero();
                for i in 0..n {
                    for k in 0..n {
                        acc += ginv.get(i, k) * nabla.get(e, i, y, z, k);
                    }
                }
                ds[(e * n + y) * n + z] = acc;
            }
        }
    }
    let dtau: Vec<S> = (0..n)
        .map(|e| {
            let mut acc = S::zero();
            for y in 0..n {
                for z in 0..n {
                    acc += ginv.get(y, z) * ds[(e * n + y) * n + z];
                }
            }
            acc
        })
        .collect();
    let k = S::one() / (S::lit(2.0) * S::lit((n - 1) as f64));
    let da = |e: usize, y: usize, z: usize| ds[(e * n + y) * n + z] - k * dtau[e] * g.get(y, z);
    let mut out = Tensor3::zeros(n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                out.set(x, y, z, da(x, y, z) - da(y, x, z));
            }
        }
    }
    out
}

/// `(∇R)(X; Y, Z, U, V)` at `p`, stored `[X][Y][Z][U][V]`.
pub fn covariant_derivative_r<S: Scalar>(chart: &MetricChart<S>, p: &[S]) -> Result<Tensor5<S>> {
    let n = chart.dim();
    let jet = chart.jet(p, 3)?;
    let g = SymmetricBilinear::from_matrix(n, &jet.g, S::lit(1e-12))?;
    check_nondegenerate(&g)?;
    let ginv = g.inverse()?;
    let conn = Connection::build(&jet, &ginv);
    let riemann = lower_riemann(&jet, &conn.mixed_riemann());
    Ok(covariant_derivative_from(&jet, &conn, &riemann))
}
