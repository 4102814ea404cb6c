"""Command-line interface for sampling, embedding, clustering and the Monte-Carlo harness."""
