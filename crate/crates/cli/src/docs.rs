//! Input documents that only the command line needs.

use anyhow::{bail, Context, Result};
use nrgeom::cartan::proca::ProcaModel;
use nrgeom::catalog::{build, weyl_geometry, SolutionDoc};
use nrgeom::exterior::FormField;
use nrgeom::geometry::{Distortion, Geometry};
use serde::{Deserialize, Serialize};

/// Which connection the curve follows.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connection {
    #[default]
    LeviCivita,
    /// Zero Cartan source with the solution's Weyl form.
    Weyl,
    /// Proca-type distortion for `model` and coordinate components of `Q`
    /// given in prefix notation.
    Proca { model: ProcaModel, q: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Start {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// `trace` input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDoc {
    pub geometry: SolutionDoc,
    #[serde(default)]
    pub connection: Connection,
    pub start: Start,
    pub step: f64,
    pub steps: usize,
    /// Also integrate the geodesic and add a deviation column.
    #[serde(default)]
    pub paired: bool,
}

impl TraceDoc {
    pub fn geometry(&self) -> Result<Geometry> {
        let inst = build(&self.geometry, &self.geometry)?;
        Ok(match &self.connection {
            Connection::LeviCivita => Geometry::riemannian(inst.chart),
            Connection::Weyl => weyl_geometry(&inst)?,
            Connection::Proca { model, q } => {
                if q.len() != inst.chart.dim() {
                    bail!("Q has {} components, chart dimension is {}", q.len(), inst.chart.dim());
                }
                let comps = q
                    .iter()
                    .map(|s| inst.chart.parse(s).with_context(|| format!("parsing Q component `{s}`")))
                    .collect::<Result<Vec<_>>>()?;
                let field = FormField::coord_one_form(comps);
                let model = *model;
                let red = model.reduce()?;
                let dist = Distortion::recipe(move |fr| Ok(model.distortion(&red, fr.eta(), &field.at(fr)?)));
                Geometry { chart: inst.chart, distortion: dist }
            }
        })
    }
}
