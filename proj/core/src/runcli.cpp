namespace microloc {}
