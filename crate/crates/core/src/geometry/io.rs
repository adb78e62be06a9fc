use serde::{Deserialize, Serialize};

use super::domain::{DiskDomain, Domain, HalfPlaneDomain, LipschitzGraphDomain, PolygonDomain};
use super::family::smoothed_square;
use super::point::{PlanePoint, UnitNormal};
use super::GeometryError;

/// On-disk domain description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Halfplane {
        anchor: [f64; 2],
        inward_normal: [f64; 2],
    },
    Graph {
        samples: Vec<[f64; 2]>,
        lipschitz_bound: f64,
        support_radius: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        normals: Vec<Option<[f64; 2]>>,
    },
    SmoothedSquare {
        radius: f64,
        #[serde(default = "default_points_per_arc")]
        points_per_arc: usize,
    },
}

fn default_points_per_arc() -> usize {
    32
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] GeometryError),
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain, GeometryError> {
        Ok(match self {
            DomainSpec::Disk { center, radius } => {
                Domain::Disk(DiskDomain::new((*center).into(), *radius)?)
            }
            DomainSpec::Halfplane {
                anchor,
                inward_normal,
            } => {
                let [n1, n2] = *inward_normal;
                // no renormalization: the loader checks the stated vector
                let n = UnitNormal { n1, n2 };
                Domain::HalfPlane(HalfPlaneDomain::new((*anchor).into(), n)?)
            }
            DomainSpec::Graph {
                samples,
                lipschitz_bound,
                support_radius,
            } => {
                let s: Vec<(f64, f64)> = samples.iter().map(|p| (p[0], p[1])).collect();
                Domain::Graph(LipschitzGraphDomain::new(&s, *lipschitz_bound, *support_radius)?)
            }
            DomainSpec::Polygon { vertices, normals } => {
                let v: Vec<PlanePoint> = vertices.iter().map(|&p| p.into()).collect();
                let poly = if normals.is_empty() {
                    PolygonDomain::new(v)?
                } else {
                    let n = normals
                        .iter()
                        .map(|o| o.map(|[n1, n2]| UnitNormal { n1, n2 }))
                        .collect();
                    PolygonDomain::with_normals(v, n)?
                };
                Domain::Polygon(poly)
            }
            DomainSpec::SmoothedSquare {
                radius,
                points_per_arc,
            } => {
                if !(0.0..=0.5).contains(radius) {
                    return Err(GeometryError::InvalidField {
                        field: "radius".into(),
                        reason: format!("must lie in [0, 0.5], got {radius}"),
                    });
                }
                Domain::Polygon(smoothed_square(*radius, *points_per_arc))
            }
        })
    }

    pub fn from_domain(d: &Domain) -> Self {
        match d {
            Domain::Disk(d) => DomainSpec::Disk {
                center: d.center.into(),
                radius: d.radius,
            },
            Domain::HalfPlane(h) => DomainSpec::Halfplane {
                anchor: h.anchor.into(),
                inward_normal: [h.inward_normal.n1, h.inward_normal.n2],
            },
            Domain::Graph(g) => DomainSpec::Graph {
                samples: g.samples().into_iter().map(|(x, a)| [x, a]).collect(),
                lipschitz_bound: g.lipschitz_bound(),
                support_radius: g.support_radius(),
            },
            Domain::Polygon(p) => DomainSpec::Polygon {
                vertices: p.vertices().iter().map(|&v| v.into()).collect(),
                normals: if p.prescribed_normals().iter().all(Option::is_none) {
                    Vec::new()
                } else {
                    p.prescribed_normals()
                        .iter()
                        .map(|o| o.map(|u| [u.n1, u.n2]))
                        .collect()
                },
            },
        }
    }
}

pub fn domain_from_json(text: &str) -> Result<Domain, LoadError> {
    let spec: DomainSpec = serde_json::from_str(text).map_err(|e| LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(spec.build()?)
}

pub fn domain_to_json(d: &Domain) -> String {
    serde_json::to_string_pretty(&DomainSpec::from_domain(d)).expect("domain spec serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_each_kind() {
        for text in [
            r#"{"type":"disk","center":[0,0],"radius":1}"#,
            r#"{"type":"halfplane","anchor":[0,0],"inward_normal":[0,1]}"#,
            r#"{"type":"graph","samples":[[-1,0],[0,0.5],[1,0]],"lipschitz_bound":0.5,"support_radius":1}"#,
            r#"{"type":"polygon","vertices":[[0,0],[1,0],[0,1]]}"#,
        ] {
            let d = domain_from_json(text).unwrap();
            let back = domain_from_json(&domain_to_json(&d)).unwrap();
            assert_eq!(d, back);
        }
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let e = domain_from_json("{\"type\":\"disk\",\n\"center\":[0,0],\n\"radius\":-1}").unwrap_err();
        assert!(e.to_string().contains("radius"), "{e}");
        let e = domain_from_json("{\"type\":\"disk\",\n\"center\":[0,0]\n\"radius\":1}").unwrap_err();
        assert!(e.to_string().starts_with("line 3"), "{e}");
        let e = domain_from_json(r#"{"type":"halfplane","anchor":[0,0],"inward_normal":[0,2]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("inward_normal"), "{e}");
    }
}
