//! The six hierarchy properties and their three groups.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::taxonomy::RelationKind;

/// A pair of relations `(left, right)` for which `d(n, left) < d(n, right)` is expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HierarchyProperty {
    #[serde(rename = "P-A")]
    ParentAncestor,
    #[serde(rename = "P-S")]
    ParentSibling,
    #[serde(rename = "P-F")]
    ParentFar,
    #[serde(rename = "A-S")]
    AncestorSibling,
    #[serde(rename = "A-F")]
    AncestorFar,
    #[serde(rename = "S-F")]
    SiblingFar,
}

impl HierarchyProperty {
    /// Table column order.
    pub const ALL: [HierarchyProperty; 6] = [
        HierarchyProperty::ParentAncestor,
        HierarchyProperty::ParentSibling,
        HierarchyProperty::ParentFar,
        HierarchyProperty::AncestorSibling,
        HierarchyProperty::AncestorFar,
        HierarchyProperty::SiblingFar,
    ];

    pub fn left(self) -> RelationKind {
        use HierarchyProperty::*;
        match self {
            ParentAncestor | ParentSibling | ParentFar => RelationKind::Parent,
            AncestorSibling | AncestorFar => RelationKind::Ancestor,
            SiblingFar => RelationKind::Sibling,
        }
    }

    pub fn right(self) -> RelationKind {
        use HierarchyProperty::*;
        match self {
            ParentAncestor => RelationKind::Ancestor,
            ParentSibling | AncestorSibling => RelationKind::Sibling,
            ParentFar | AncestorFar | SiblingFar => RelationKind::FarRelative,
        }
    }

    pub fn group(self) -> PropertyGroup {
        match self.left() {
            RelationKind::Parent => PropertyGroup::Parent,
            RelationKind::Ancestor => PropertyGroup::Ancestor,
            _ => PropertyGroup::Sibling,
        }
    }

    /// A-S has no expected ordering (both sides sit at distance 2) and is kept
    /// out of training data.
    pub fn trainable(self) -> bool {
        self != HierarchyProperty::AncestorSibling
    }

    pub fn as_str(self) -> &'static str {
        use HierarchyProperty::*;
        match self {
            ParentAncestor => "P-A",
            ParentSibling => "P-S",
            ParentFar => "P-F",
            AncestorSibling => "A-S",
            AncestorFar => "A-F",
            SiblingFar => "S-F",
        }
    }
}

impl fmt::Display for HierarchyProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown hierarchy property `{0}` (expected one of P-A, P-S, P-F, A-S, A-F, S-F)")]
pub struct UnknownProperty(pub String);

impl FromStr for HierarchyProperty {
    type Err = UnknownProperty;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HierarchyProperty::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownProperty(s.to_string()))
    }
}

/// Properties grouped by their left relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropertyGroup {
    #[serde(rename = "P-*")]
    Parent,
    #[serde(rename = "A-*")]
    Ancestor,
    #[serde(rename = "S-*")]
    Sibling,
}

impl PropertyGroup {
    pub const ALL: [PropertyGroup; 3] = [
        PropertyGroup::Parent,
        PropertyGroup::Ancestor,
        PropertyGroup::Sibling,
    ];

    pub fn members(self) -> impl Iterator<Item = HierarchyProperty> {
        HierarchyProperty::ALL
            .into_iter()
            .filter(move |p| p.group() == self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyGroup::Parent => "P-*",
            PropertyGroup::Ancestor => "A-*",
            PropertyGroup::Sibling => "S-*",
        }
    }
}

impl fmt::Display for PropertyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use HierarchyProperty::*;
    use RelationKind::*;

    #[test]
    fn relation_pairs() {
        let pairs: Vec<_> = HierarchyProperty::ALL
            .iter()
            .map(|p| (p.left(), p.right()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                (Parent, Ancestor),
                (Parent, Sibling),
                (Parent, FarRelative),
                (Ancestor, Sibling),
                (Ancestor, FarRelative),
                (Sibling, FarRelative),
            ]
        );
    }

    #[test]
    fn groups() {
        let members = |g: PropertyGroup| g.members().collect::<Vec<_>>();
        assert_eq!(
            members(PropertyGroup::Parent),
            vec![ParentAncestor, ParentSibling, ParentFar]
        );
        assert_eq!(
            members(PropertyGroup::Ancestor),
            vec![AncestorSibling, AncestorFar]
        );
        assert_eq!(members(PropertyGroup::Sibling), vec![SiblingFar]);
    }

    #[test]
    fn names_round_trip() {
        for p in HierarchyProperty::ALL {
            assert_eq!(p.as_str().parse::<HierarchyProperty>().unwrap(), p);
            let code: String = [p.left().letter(), '-', p.right().letter()]
                .iter()
                .collect();
            assert_eq!(code, p.as_str());
        }
        assert!("X-Y".parse::<HierarchyProperty>().is_err());
        assert_eq!(serde_json::to_string(&SiblingFar).unwrap(), "\"S-F\"");
    }
}
