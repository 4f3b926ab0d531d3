use crate::dataset::{LabelSet, SampleKind, Variant, NO_ILLUSION};

use super::ClientError;

/// Which of the four built-in prompts to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptTemplate {
    RawClass,
    RawChar,
    IllusionClass,
    IllusionChar,
}

const RAW_CLASS: &str = "Which class is in the picture: {class_names}. Just choose the correct class without any extra explanation.";
const RAW_CHAR: &str = "What sequence of characters are in the picture? Just say the sequence. Put your answer in quotation marks.";
const ILLUSION_CLASS: &str = "There might be an illusion of something in the image or not. These are the classes that an illusion might belong to: {class_names}. Just choose the correct class without any extra explanation.";
const ILLUSION_CHAR: &str = "There might be an illusion of a sequence of characters in the picture. If you cannot detect the sequence of characters, answer with \"No illusion\". If you can detect the sequence of characters, what sequence of characters are in the picture? Just say the sequence. Put your answer in quotation marks.";

impl PromptTemplate {
    /// Filtered images share the illusion prompt.
    pub fn select(kind: SampleKind, variant: Variant) -> Self {
        match (kind, variant) {
            (SampleKind::Classification, Variant::Raw) => PromptTemplate::RawClass,
            (SampleKind::Char, Variant::Raw) => PromptTemplate::RawChar,
            (SampleKind::Classification, _) => PromptTemplate::IllusionClass,
            (SampleKind::Char, _) => PromptTemplate::IllusionChar,
        }
    }

    /// Template text; classification templates carry a `{class_names}` slot.
    pub fn text(self) -> &'static str {
        match self {
            PromptTemplate::RawClass => RAW_CLASS,
            PromptTemplate::RawChar => RAW_CHAR,
            PromptTemplate::IllusionClass => ILLUSION_CLASS,
            PromptTemplate::IllusionChar => ILLUSION_CHAR,
        }
    }

    fn offers_no_illusion(self) -> bool {
        matches!(
            self,
            PromptTemplate::IllusionClass | PromptTemplate::IllusionChar
        )
    }
}

/// Fills the template for `(kind, variant)`.
///
/// Raw classification prompts list the concept classes; illusion and filtered
/// prompts append `"No illusion"`. Character prompts take no labels.
pub fn build_prompt(
    kind: SampleKind,
    variant: Variant,
    labels: Option<&LabelSet>,
) -> Result<String, ClientError> {
    let template = PromptTemplate::select(kind, variant);
    if kind == SampleKind::Char {
        return Ok(template.text().to_string());
    }
    let labels = labels.ok_or(ClientError::MissingLabels)?;
    let mut names: Vec<&str> = labels
        .concept_classes()
        .iter()
        .map(String::as_str)
        .collect();
    if template.offers_no_illusion() {
        names.push(NO_ILLUSION);
    }
    Ok(template.text().replace("{class_names}", &names.join(", ")))
}
