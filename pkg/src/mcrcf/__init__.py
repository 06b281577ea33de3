"""Memory-based collaborative filtering on an inverted index."""
