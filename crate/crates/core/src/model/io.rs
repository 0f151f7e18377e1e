use serde::{Deserialize, Serialize};

/// On-disk form of a financial system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub n: usize,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    #[serde(rename = "Md")]
    pub md: Vec<Vec<f64>>,
    #[serde(rename = "Ms")]
    pub ms: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl SystemDocument {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("system documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FinancialSystem, ModelError};

    const SYSTEM_B: &str = r#"{"n":2,"a":[1,0],"d":[1,1],"Md":[[0,0.5],[0.5,0]],"Ms":[[0,0],[0,0]]}"#;

    #[test]
    fn round_trip() {
        let doc = SystemDocument::from_json(SYSTEM_B).unwrap();
        let f = FinancialSystem::from_document(&doc).unwrap();
        let back = FinancialSystem::from_document(&SystemDocument::from_json(&f.to_document().to_json_pretty()).unwrap()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn meta_is_preserved() {
        let text = r#"{"n":1,"a":[1],"d":[1],"Md":[[0]],"Ms":[[0]],"meta":{"seed":7}}"#;
        let doc = SystemDocument::from_json(text).unwrap();
        assert_eq!(doc.meta.as_ref().unwrap()["seed"], 7);
        assert!(doc.to_json_pretty().contains("\"seed\": 7"));
    }

    #[test]
    fn declared_size_is_checked() {
        let text = r#"{"n":3,"a":[1,0],"d":[1,1],"Md":[[0,0.5],[0.5,0]],"Ms":[[0,0],[0,0]]}"#;
        let doc = SystemDocument::from_json(text).unwrap();
        assert!(matches!(
            FinancialSystem::from_document(&doc),
            Err(ModelError::DimensionMismatch { field: "a", .. })
        ));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let text = r#"{"n":2,"a":[1,0],"d":[1,1],"Md":[[0,0.5],[0.5]],"Ms":[[0,0],[0,0]]}"#;
        let doc = SystemDocument::from_json(text).unwrap();
        assert!(FinancialSystem::from_document(&doc).is_err());
    }
}
