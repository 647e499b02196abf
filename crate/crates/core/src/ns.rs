//! Namespace IRIs and the well-known terms the hub reasons about.
//!
//! Every constant is a full IRI string so it can be compared against
//! [`Iri::as_str`](crate::rdf::Iri::as_str) without allocation.

macro_rules! terms {
    ($ns:literal; $($name:ident = $local:literal),* $(,)?) => {
        pub const NS: &str = $ns;
        $(pub const $name: &str = concat!($ns, $local);)*
    };
}

pub mod rdf {
    terms!("http://www.w3.org/1999/02/22-rdf-syntax-ns#";
        TYPE = "type",
        LANG_STRING = "langString",
        PROPERTY = "Property",
    );
}

pub mod rdfs {
    terms!("http://www.w3.org/2000/01/rdf-schema#";
        LABEL = "label",
        COMMENT = "comment",
        SUB_CLASS_OF = "subClassOf",
        SUB_PROPERTY_OF = "subPropertyOf",
        DOMAIN = "domain",
        RANGE = "range",
        SEE_ALSO = "seeAlso",
        IS_DEFINED_BY = "isDefinedBy",
        CLASS = "Class",
    );
}

pub mod owl {
    terms!("http://www.w3.org/2002/07/owl#";
        CLASS = "Class",
        OBJECT_PROPERTY = "ObjectProperty",
        DATATYPE_PROPERTY = "DatatypeProperty",
        EQUIVALENT_CLASS = "equivalentClass",
        EQUIVALENT_PROPERTY = "equivalentProperty",
        INVERSE_OF = "inverseOf",
        MIN_CARDINALITY = "minCardinality",
        MAX_CARDINALITY = "maxCardinality",
        SAME_AS = "sameAs",
    );
}

pub mod xsd {
    terms!("http://www.w3.org/2001/XMLSchema#";
        STRING = "string",
        BOOLEAN = "boolean",
        INT = "int",
        INTEGER = "integer",
        LONG = "long",
        NON_NEGATIVE_INTEGER = "nonNegativeInteger",
        DECIMAL = "decimal",
        DOUBLE = "double",
        FLOAT = "float",
        DATE_TIME = "dateTime",
        ANY_URI = "anyURI",
    );
}

pub mod ssn {
    terms!("http://www.w3.org/ns/ssn/";
        SYSTEM = "System",
    );
}

pub mod ssn_system {
    terms!("http://www.w3.org/ns/ssn/systems/";
        SYSTEM_PROPERTY = "SystemProperty",
        ACCURACY = "Accuracy",
        FREQUENCY = "Frequency",
        LATENCY = "Latency",
        PRECISION = "Precision",
        RESOLUTION = "Resolution",
        RESPONSE_TIME = "ResponseTime",
        HAS_SYSTEM_PROPERTY = "hasSystemProperty",
    );
}

pub mod sosa {
    terms!("http://www.w3.org/ns/sosa/";
        SENSOR = "Sensor",
        ACTUATOR = "Actuator",
        PLATFORM = "Platform",
        OBSERVATION = "Observation",
        ACTUATION = "Actuation",
        OBSERVABLE_PROPERTY = "ObservableProperty",
        OBSERVED_PROPERTY = "ObservedProperty",
        ACTUATABLE_PROPERTY = "ActuatableProperty",
        FEATURE_OF_INTEREST = "FeatureOfInterest",
        RESULT = "Result",
        MADE_BY_SENSOR = "madeBySensor",
        MADE_OBSERVATION = "madeObservation",
        MADE_BY_ACTUATOR = "madeByActuator",
        MADE_ACTUATION = "madeActuation",
        OBSERVES = "observes",
        IS_OBSERVED_BY = "isObservedBy",
        OBSERVED_PROPERTY_P = "observedProperty",
        ACTS_ON_PROPERTY = "actsOnProperty",
        IS_ACTED_ON_BY = "isActedOnBy",
        HAS_RESULT = "hasResult",
        IS_RESULT_OF = "isResultOf",
        HAS_FEATURE_OF_INTEREST = "hasFeatureOfInterest",
        IS_FEATURE_OF_INTEREST_OF = "isFeatureOfInterestOf",
        RESULT_TIME = "resultTime",
        IS_HOSTED_BY = "isHostedBy",
        HOSTS = "hosts",
    );
}

pub mod iot_lite {
    terms!("http://purl.oclc.org/NET/UNIS/fiware/iot-lite#";
        SERVICE = "Service",
        METADATA = "Metadata",
        EXPOSED_BY = "exposedBy",
        EXPOSES = "exposes",
        HAS_UNIT = "hasUnit",
        IS_MOBILE = "isMobile",
        ENDPOINT = "endpoint",
        HAS_METADATA = "hasMetadata",
        METADATA_TYPE = "metadataType",
        METADATA_VALUE = "metadataValue",
    );
}

pub mod iot_taxonomy {
    terms!("http://purl.org/iot/vocab/iot-taxonomy-lite#";
        QUALITY_OF_OBSERVATION = "QualityOfObservation",
        POOR = "Poor",
        FAIR = "Fair",
        GOOD = "Good",
        SOUND_SENSOR = "soundSensor",
        TEMPERATURE_SENSOR = "TemperatureSensor",
        SOUND_PRESSURE_LEVEL = "SoundPressureLevel",
        TEMPERATURE = "Temperature",
        DECIBEL_A = "DecibelA",
        DEGREE_CELSIUS = "DegreeCelsius",
        DOMAIN_OF_INTEREST = "DomainOfInterest",
        ENVIRONMENT = "Environment",
        DISCOVER_SENSORS = "DiscoverSensors",
        GET_WORKPLACE_OBSERVATIONS = "GetWorkplaceObservations",
        KNOW_SENSORS_IN_THE_AREA = "KnowSensorsInTheArea",
        HAS_DOMAIN_OF_INTEREST = "hasDomainOfInterest",
        HAS_QUALITY = "hasQuality",
    );
}

pub mod qu {
    terms!("http://purl.org/NET/ssnx/qu/qu#";
        UNIT = "Unit",
    );
}

pub mod geo {
    terms!("http://www.w3.org/2003/01/geo/wgs84_pos#";
        POINT = "Point",
        SPATIAL_THING = "SpatialThing",
        LOCATION = "location",
        LAT = "lat",
        LONG = "long",
    );
}

pub mod sf {
    terms!("http://www.opengis.net/ont/sf#";
        POINT = "Point",
    );
}

pub mod schema {
    terms!("https://schema.org/";
        DOMAIN_INCLUDES = "domainIncludes",
        RANGE_INCLUDES = "rangeIncludes",
        MIN_VALUE = "minValue",
        MAX_VALUE = "maxValue",
    );
}

pub mod dul {
    terms!("http://www.loa.istc.cnr.it/ontologies/DUL.owl#";
        HAS_DATA_VALUE = "hasDataValue",
    );
}

pub mod con {
    terms!("http://purl.org/adaptcentre/openscience/ontologies/consent#";
        ALLOWED_PARTY = "AllowedParty",
        PERMISSION = "Permission",
        ACTION = "Action",
        PURPOSE = "Purpose",
        CONSENT = "Consent",
        CONSENTING_PARTY = "ConsentingParty",
        DATA_SUBJECT = "DataSubject",
        PERMISSION_GIVEN_TO = "permission_given_to",
        PERMISSION_GIVEN_FOR_DATA = "permission_given_for_data",
        PERMISSION_GIVEN_FOR_ACTIVITY = "permission_given_for_activity",
        ACTIVITY_HAS_PURPOSE = "activity_has_purpose",
        GIVES_CONSENT = "gives_consent",
    );
}

pub mod gdprtext {
    terms!("https://w3id.org/GDPRtEXT#";
        CONTROLLER = "Controller",
    );
}

pub mod priv_ {
    terms!("http://purl.org/iot/ontology/fiesta-priv#";
        HAS_PERMISSION = "hasPermission",
        OWNS = "owns",
        OWNED_BY = "ownedBy",
        CONTROL = "control",
        // Links a con:Consent to the con:Permission it covers. No published
        // term exists for this link; it is only referenced from
        // `consent::compile` and the `consent::decompile_*` readers.
        CONSENT_FOR_PERMISSION = "consentForPermission",
        RESOURCE_GRAPH = "resourceGraph",
        OBSERVATION_GRAPH = "observationGraph",
        CONSENT_GRAPH = "consentGraph",
        USER_PERMISSIONS_GRAPH = "userPermissionsGraph",
        VOCABULARY_GRAPH = "vocabularyGraph",
    );
}

/// Namespaces whose terms may never appear in a user-authored query.
pub const PRIVACY_NAMESPACES: [&str; 3] = [con::NS, priv_::NS, gdprtext::NS];

/// Returns true when `iri` lives in one of the privacy namespaces.
pub fn is_privacy_term(iri: &str) -> bool {
    PRIVACY_NAMESPACES.iter().any(|ns| iri.starts_with(ns))
}
