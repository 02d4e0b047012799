//! Shared setups for the criterion benchmarks in `benches/`.

use vagflow_core::assembly::{
    assemble_stiffness, sample_gibbs, DofVector, FluxScheme, StiffnessSet, System,
};
use vagflow_core::mesh::{
    build_submesh, compute_lumping, generate_structured, LumpedMeasures, LumpingRule,
    Mesh, MeshKind,
};
use vagflow_core::physics::{t1_steady, CatalogModel, Model, Potential, TensorField};

/// Discretized Fokker-Planck setup on an n x n split-triangles mesh.
pub struct Setup {
    pub mesh: Mesh,
    pub lumped: LumpedMeasures,
    pub stiffness: StiffnessSet,
    pub model: Model,
    pub state: DofVector,
}

impl Setup {
    pub fn fokker_planck(n: usize) -> Self {
        let mesh = generate_structured(MeshKind::SplitTriangles, n, None).unwrap();
        let sub = build_submesh(&mesh).unwrap();
        let lumped = compute_lumping(&mesh, &LumpingRule::UniformFraction(0.1)).unwrap();
        let tensor = TensorField::diagonal(1.0, 10.0).unwrap();
        let stiffness = assemble_stiffness(&mesh, &sub, &tensor).unwrap();
        let model = Model::catalog(CatalogModel::FokkerPlanckLog);
        // a smooth positive state away from equilibrium
        let mut state = sample_gibbs(&mesh, &t1_steady(1.0));
        for (i, v) in state.vertex.iter_mut().enumerate() {
            *v *= 1.0 + 0.3 * ((i % 7) as f64 / 7.0);
        }
        Setup { mesh, lumped, stiffness, model, state }
    }

    pub fn system(&self) -> System<'_> {
        System::new(
            &self.mesh,
            &self.lumped,
            &self.stiffness,
            FluxScheme::Nonlinear,
            &self.model,
            &Potential::Gravity { g: 1.0 },
            None,
        )
    }
}
