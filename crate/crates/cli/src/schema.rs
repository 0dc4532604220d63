//! Minimal structural JSON-schema validator for the shipped output schemas.
//!
//! Supports the subset the schemas use: `type` (single or list), `required`,
//! `properties`, `additionalProperties` (bool or schema), `items`, `enum`.

use serde_json::Value;

pub fn validate(value: &Value, schema: &Value) -> Result<(), String> {
    validate_at(value, schema, "$")
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                "integer"
            } else {
                "number"
            }
        }
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn type_matches(value: &Value, expected: &str) -> bool {
    match expected {
        // Integers are numbers too.
        "number" => matches!(value, Value::Number(_)),
        other => type_name(value) == other,
    }
}

fn validate_at(value: &Value, schema: &Value, path: &str) -> Result<(), String> {
    let schema = schema
        .as_object()
        .ok_or_else(|| format!("{path}: schema node must be an object"))?;

    if let Some(expected) = schema.get("type") {
        let allowed: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(list) => list.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{path}: bad `type` in schema")),
        };
        if !allowed.iter().any(|t| type_matches(value, t)) {
            return Err(format!(
                "{path}: expected {}, found {}",
                allowed.join("|"),
                type_name(value)
            ));
        }
    }

    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: value not in enum"));
        }
    }

    if let Value::Object(map) = value {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for name in required.iter().filter_map(Value::as_str) {
                if !map.contains_key(name) {
                    return Err(format!("{path}: missing required field `{name}`"));
                }
            }
        }
        let properties = schema.get("properties").and_then(Value::as_object);
        for (key, field) in map {
            let field_path = format!("{path}.{key}");
            if let Some(field_schema) = properties.and_then(|p| p.get(key)) {
                validate_at(field, field_schema, &field_path)?;
            } else {
                match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        return Err(format!("{path}: unexpected field `{key}`"));
                    }
                    Some(Value::Object(_)) => {
                        validate_at(
                            field,
                            schema.get("additionalProperties").unwrap(),
                            &field_path,
                        )?;
                    }
                    _ => {}
                }
            }
        }
    }

    if let Value::Array(items) = value {
        if let Some(item_schema) = schema.get("items") {
            for (i, item) in items.iter().enumerate() {
                validate_at(item, item_schema, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}
