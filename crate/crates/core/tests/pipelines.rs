use birkhoff_lab::birkhoff::{cross_section, emit_figure_data, LabelCounts, ScanConfig};
use birkhoff_lab::io::{bisto_from_json, cmatrix_from_json, cmatrix_to_json, MatrixJson};
use birkhoff_lab::matrix::{BistoMatrix, PermMatrix, Tolerances};
use birkhoff_lab::sampling::{sample_many, SamplerConfig, SamplerMethod};
use birkhoff_lab::unisto::{classify_point, decide, verify_certificate, ScanMode, SolverConfig, Status};

#[test]
fn certificates_survive_json() {
    let cfg = SolverConfig::default();
    for n in [2, 3, 4] {
        let samples = sample_many(&SamplerConfig::new(SamplerMethod::CubeCore, n, 40 + n as u64), 30).unwrap();
        for b in samples {
            let text = serde_json::to_string(&MatrixJson::from_bisto(&b)).unwrap();
            let back = bisto_from_json(&text, &cfg.tol).unwrap();
            assert_eq!(back, b);
            let v = decide(&back, &cfg);
            if v.status == Status::Unistochastic {
                let u = cmatrix_from_json(&cmatrix_to_json(v.certificate.as_ref().unwrap())).unwrap();
                assert!(verify_certificate(&b, &u, &cfg.tol));
            }
        }
    }
}

fn short_edge_counts(mode: ScanMode) -> (LabelCounts, String) {
    let cfg = SolverConfig::default();
    let id = PermMatrix::identity(4).to_bisto();
    let p12 = PermMatrix::from_cycles(4, "12").unwrap().to_bisto();
    let grid = cross_section(&id, &p12, &ScanConfig::default(), |b: &BistoMatrix| classify_point(b, mode, &cfg)).unwrap();
    (grid.counts(), emit_figure_data(&grid, &[("plane", "perm:I,perm:12".into())]))
}

#[test]
fn short_edge_plane_is_pinned() {
    let (full, csv) = short_edge_counts(ScanMode::Full);
    let (chain, _) = short_edge_counts(ScanMode::ChainOnly);
    // regression values at resolution 101, range 2.5; every chain-passing
    // point here is unistochastic
    let pinned = PINNED_SHORT_EDGE;
    assert_eq!(
        [full.not_bistochastic, full.outside, full.chain_only, full.unisto, full.undecided],
        pinned,
        "{full:?}"
    );
    assert_eq!(chain.outside, full.outside);
    assert_eq!(chain.undecided, full.unisto + full.chain_only + full.undecided);
    let (_, again) = short_edge_counts(ScanMode::Full);
    assert_eq!(csv, again);
}

const PINNED_SHORT_EDGE: [usize; 5] = [9829, 0, 0, 372, 0];

#[test]
fn tolerances_flow_into_validation() {
    let loose = Tolerances { bis: 1e-3, ..Tolerances::default() };
    let text = r#"{"n":2,"re":[[0.5,0.5005],[0.5,0.4995]]}"#;
    assert!(bisto_from_json(text, &Tolerances::default()).is_err());
    assert!(bisto_from_json(text, &loose).is_ok());
}
