"""Closed vocabularies shared across the pipeline.

Every label that crosses a module boundary comes from one of these tuples.
Parsers never extend them at runtime; anything outside a vocabulary is a
contract violation or a quarantine, never a coerced label.
"""

# 12 query sectors plus the escape token used by the sector classifier.
SECTORS = (
    "banking_finance",
    "healthcare_pharma",
    "insurance",
    "ecommerce_retail",
    "telecom_network_security",
    "social_media",
    "education_learning_analytics",
    "iot_smart_systems",
    "government_public_admin",
    "cybersecurity_intrusion_detection",
    "hr_recruitment",
    "transportation_logistics",
)
SECTOR_NONE = "none_of_the_above"
SECTOR_LABELS = SECTORS + (SECTOR_NONE,)

# 13-class regulated data category ontology.
RDC_CLASSES = (
    "Identifier_PII",
    "Contact_Info",
    "Device_OnlineID",
    "Biometric",
    "Location_IoT",
    "Health_Clinical",
    "Financial",
    "Child_Data",
    "Demographic",
    "Behavioural",
    "Environmental",
    "Operational_Business",
    "Other",
)

# 13 legal frameworks in catalog scope.
REGULATIONS = (
    "GDPR",
    "ePrivacy Directive",
    "NIS2",
    "PSD2",
    "EU eHealth Network",
    "CCPA",
    "CPRA",
    "HIPAA",
    "HITECH",
    "GLBA",
    "COPPA",
    "FERPA",
    "ECPA",
)

EU_REGULATIONS = frozenset(
    {"GDPR", "ePrivacy Directive", "NIS2", "PSD2", "EU eHealth Network"}
)

RELEVANCE_TOKENS = ("Relevant", "Not relevant")
PREDICTOR_VALIDATION_TOKENS = ("Valid", "Not valid")
PAIR_STATUS_TOKENS = ("Regulated", "Not Regulated")
PAIR_CONFIDENCE_TOKENS = ("High", "Medium", "Low")

# Audit stage tags, in pipeline order.
AUDIT_STAGES = ("relevance", "sector", "predictor", "rdc", "pair-status")

STAGE_VOCABULARY = {
    "relevance": RELEVANCE_TOKENS,
    "sector": SECTOR_LABELS,
    "predictor": PREDICTOR_VALIDATION_TOKENS,
    "rdc": RDC_CLASSES,
    "pair-status": PAIR_STATUS_TOKENS,
}
