"""Loss, data pipeline, training and verification."""
