class TrainerError(Exception):
    """Any defect in training inputs: bad records, empty batches, OOV tokens."""
