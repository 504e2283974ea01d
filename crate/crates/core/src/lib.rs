//! Recognition of changemaker lattices among Goeritz lattices of alternating
//! links, with certificates.
//!
//! The pipeline takes the white graph of a reduced alternating diagram and a
//! slope `p/q`, searches for an isomorphism between the graph lattice and a
//! `p/q`-changemaker lattice, normalizes the labeling by flypes, extracts the
//! rational tangle of slope `(q-r)/r` and reduces to an `(n-1/2)`-changemaker
//! labeling with a marked crossing.
//!
//! ```
//! use changemaker::{ingest::parse_graph_string, pipeline::{run_pipeline, PipelineOptions}};
//!
//! let theta = parse_graph_string("0-1;0-1;0-1").unwrap();
//! let cert = run_pipeline(&theta, &"3/2".parse().unwrap(), PipelineOptions::default()).unwrap();
//! assert!(cert.found);
//! assert_eq!(cert.recognition.unwrap().surgery.slope.to_string(), "-3/2");
//! ```

pub mod contfrac;
pub mod graph;
pub mod ingest;
pub mod lattice;
pub mod linalg;
pub mod pipeline;
pub mod recognition;
pub mod surgery;

pub use contfrac::{CfError, NegCf, PosCf, Rational};
pub use graph::{goeritz_matrix, GoeritzMatrix, GraphError, WhiteGraph};
pub use lattice::{
    build_cm_lattice, AmbientVector, ChangemakerLatticeSpec, FractionalBasis, LatticeError, SigmaTail,
};
pub use pipeline::{run_pipeline, verify_certificate, Certificate, PipelineError, PipelineOptions};
pub use recognition::{find_embedding, RecognitionError, SearchOutcome, VertexLabeling};
