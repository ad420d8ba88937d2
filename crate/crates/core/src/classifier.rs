//! Order of the pole at `s = 1` of `L(s, Sym²(f × g))` from the structural
//! data of the two forms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormDescriptor {
    pub id: String,
    pub dihedral: bool,
    /// The quadratic extension `K` the form is induced from.
    #[serde(default)]
    pub inducing_field: Option<String>,
    #[serde(default)]
    pub property_p: Option<bool>,
    pub twist_class: String,
}

impl FormDescriptor {
    pub fn non_dihedral(id: &str, twist_class: &str) -> Self {
        Self { id: id.into(), dihedral: false, inducing_field: None, property_p: None, twist_class: twist_class.into() }
    }

    pub fn dihedral(id: &str, twist_class: &str, field: &str, property_p: bool) -> Self {
        Self {
            id: id.into(),
            dihedral: true,
            inducing_field: Some(field.into()),
            property_p: Some(property_p),
            twist_class: twist_class.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dihedral != self.property_p.is_some() {
            return invalid(format!("{}: property P is given exactly when the form is dihedral", self.id));
        }
        if self.dihedral != self.inducing_field.is_some() {
            return invalid(format!("{}: inducing field is given exactly when the form is dihedral", self.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeltaCase {
    TwistDihedralP,
    TwistDihedralNoP,
    TwistNonDihedral,
    SameInducingField,
    DifferentInducingFields,
    OneDihedral,
    NeitherDihedral,
}

impl DeltaCase {
    pub fn value(self) -> u8 {
        match self {
            DeltaCase::TwistDihedralP => 4,
            DeltaCase::TwistDihedralNoP => 3,
            DeltaCase::TwistNonDihedral | DeltaCase::SameInducingField => 2,
            DeltaCase::DifferentInducingFields | DeltaCase::OneDihedral | DeltaCase::NeitherDihedral => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DeltaCase::TwistDihedralP => "twist-equivalent, dihedral with property P",
            DeltaCase::TwistDihedralNoP => "twist-equivalent, dihedral without property P",
            DeltaCase::TwistNonDihedral => "twist-equivalent, non-dihedral",
            DeltaCase::SameInducingField => "both dihedral from the same field, not twist-equivalent",
            DeltaCase::DifferentInducingFields => "both dihedral from different fields",
            DeltaCase::OneDihedral => "exactly one dihedral",
            DeltaCase::NeitherDihedral => "neither dihedral, not twist-equivalent",
        }
    }
}

pub fn classify_pair(f: &FormDescriptor, g: &FormDescriptor) -> Result<DeltaCase> {
    f.validate()?;
    g.validate()?;
    if f.twist_class == g.twist_class {
        // Twisting preserves dihedrality, the inducing field and property P.
        if f.dihedral != g.dihedral || f.inducing_field != g.inducing_field || f.property_p != g.property_p {
            return invalid(format!("{} and {} share a twist class but differ structurally", f.id, g.id));
        }
        return Ok(match (f.dihedral, f.property_p) {
            (true, Some(true)) => DeltaCase::TwistDihedralP,
            (true, _) => DeltaCase::TwistDihedralNoP,
            (false, _) => DeltaCase::TwistNonDihedral,
        });
    }
    Ok(match (f.dihedral, g.dihedral) {
        (true, true) if f.inducing_field == g.inducing_field => DeltaCase::SameInducingField,
        (true, true) => DeltaCase::DifferentInducingFields,
        (true, false) | (false, true) => DeltaCase::OneDihedral,
        (false, false) => DeltaCase::NeitherDihedral,
    })
}

pub fn delta_pair(f: &FormDescriptor, g: &FormDescriptor) -> Result<u8> {
    Ok(classify_pair(f, g)?.value())
}

pub fn delta_self(f: &FormDescriptor) -> Result<u8> {
    delta_pair(f, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedDelta {
    pub mean: f64,
    /// Whether the averaging hypothesis (odd class number, or `g` not
    /// dihedral) holds.
    pub valid: bool,
}

pub fn family_average_delta(family: &[FormDescriptor], g: &FormDescriptor, class_number_odd: bool) -> Result<AveragedDelta> {
    if family.is_empty() {
        return invalid("family must be nonempty");
    }
    if class_number_odd {
        if let Some(f) = family.iter().find(|f| f.dihedral) {
            return invalid(format!("{} is dihedral, impossible with odd class number", f.id));
        }
    }
    let mut total = 0u64;
    for f in family {
        total += delta_pair(f, g)? as u64;
    }
    Ok(AveragedDelta {
        mean: total as f64 / family.len() as f64,
        valid: class_number_odd || !g.dihedral,
    })
}

/// Every structural combination of a pair: each side is non-dihedral or
/// dihedral from one of two fields with or without property P, and the pair
/// is twist-equivalent or not. Twist-equivalent pairs share their structure.
pub fn structural_pairs() -> Vec<(FormDescriptor, FormDescriptor)> {
    let shapes = |id: &str, class: &str| {
        vec![
            FormDescriptor::non_dihedral(id, class),
            FormDescriptor::dihedral(id, class, "K1", true),
            FormDescriptor::dihedral(id, class, "K1", false),
            FormDescriptor::dihedral(id, class, "K2", true),
            FormDescriptor::dihedral(id, class, "K2", false),
        ]
    };
    let fs = shapes("f", "A");
    let mut out = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let mut twin = f.clone();
        twin.id = "g".into();
        out.push((f.clone(), twin));
        for g in shapes("g", "B").into_iter().skip(i) {
            out.push((f.clone(), g));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let dp = FormDescriptor::dihedral("f", "A", "K1", true);
        assert_eq!(delta_self(&dp).unwrap(), 4);
        assert_eq!(delta_self(&FormDescriptor::dihedral("f", "A", "K1", false)).unwrap(), 3);
        assert_eq!(delta_self(&FormDescriptor::non_dihedral("f", "A")).unwrap(), 2);
        let f = FormDescriptor::non_dihedral("f", "A");
        let g = FormDescriptor::non_dihedral("g", "A");
        assert_eq!(delta_pair(&f, &g).unwrap(), 2);
        let f = FormDescriptor::dihedral("f", "A", "K1", true);
        let g = FormDescriptor::dihedral("g", "B", "K2", true);
        assert_eq!(delta_pair(&f, &g).unwrap(), 1);
    }

    #[test]
    fn malformed() {
        let mut f = FormDescriptor::non_dihedral("f", "A");
        f.property_p = Some(true);
        assert!(delta_self(&f).is_err());
        let mut f = FormDescriptor::dihedral("f", "A", "K1", true);
        f.inducing_field = None;
        assert!(delta_self(&f).is_err());
        let f = FormDescriptor::dihedral("f", "A", "K1", true);
        let g = FormDescriptor::non_dihedral("g", "A");
        assert!(delta_pair(&f, &g).is_err());
    }

    #[test]
    fn averaged() {
        let g = FormDescriptor::non_dihedral("g", "G");
        let fam: Vec<_> = (0..50).map(|i| FormDescriptor::non_dihedral(&format!("f{i}"), &format!("C{i}"))).collect();
        assert_eq!(family_average_delta(&fam, &g, true).unwrap(), AveragedDelta { mean: 1.0, valid: true });
        assert_eq!(family_average_delta(&fam, &g, false).unwrap(), AveragedDelta { mean: 1.0, valid: true });
        let gd = FormDescriptor::dihedral("g", "G", "K1", false);
        let mut fam2 = fam.clone();
        fam2.push(FormDescriptor::dihedral("d", "D", "K1", true));
        let r = family_average_delta(&fam2, &gd, false).unwrap();
        assert!(!r.valid);
        assert!((r.mean - (50.0 + 2.0) / 51.0).abs() < 1e-15);
        assert!(family_average_delta(&fam2, &g, true).is_err());
        assert!(family_average_delta(&[], &g, true).is_err());
    }

    #[test]
    fn structural_table_size() {
        let pairs = structural_pairs();
        assert_eq!(pairs.len(), 20);
        assert!(pairs.iter().all(|(f, g)| delta_pair(f, g).is_ok()));
    }

    #[test]
    fn json_round_trip() {
        let f = FormDescriptor::dihedral("f", "A", "K1", true);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<FormDescriptor>(&s).unwrap(), f);
        let g: FormDescriptor = serde_json::from_str(r#"{"id":"g","dihedral":false,"twist_class":"B"}"#).unwrap();
        assert_eq!(g, FormDescriptor::non_dihedral("g", "B"));
    }
}
