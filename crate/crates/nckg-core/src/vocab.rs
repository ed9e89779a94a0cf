//! Well-known IRIs and namespaces.

use crate::term::Iri;

pub const CKG_PREFIX: &str = "ckg";
pub const CKG_NS: &str = "http://example.org/NCKG/";
pub const RDF_PREFIX: &str = "rdf";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_PREFIX: &str = "rdfs";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";

pub fn rdf_type() -> Iri {
    Iri::new(alloc::format!("{RDF_NS}type")).unwrap()
}

pub fn rdfs_subclass_of() -> Iri {
    Iri::new(alloc::format!("{RDFS_NS}subClassOf")).unwrap()
}

pub fn rdfs_class() -> Iri {
    Iri::new(alloc::format!("{RDFS_NS}Class")).unwrap()
}

/// `ckg:<local>`
pub fn ckg(local: &str) -> Iri {
    Iri::new(alloc::format!("{CKG_NS}{local}")).unwrap()
}

pub fn has_risk_category() -> Iri {
    ckg("hasRiskCategory")
}

/// Read-alias for `ckg:hasRiskCategory` used by some source material.
pub fn has_risk_label() -> Iri {
    ckg("hasRiskLabel")
}

pub fn has_property() -> Iri {
    ckg("hasProperty")
}

pub fn contract_actor() -> Iri {
    ckg("ContractActor")
}

pub fn contract_object() -> Iri {
    ckg("ContractObject")
}

pub fn contract_property() -> Iri {
    ckg("ContractProperty")
}

pub fn contract_constraint() -> Iri {
    ckg("ContractConstraint")
}

pub fn contract_event() -> Iri {
    ckg("ContractEvent")
}
