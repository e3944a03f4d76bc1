"""A call-by-name functional language with asynchronous session channels."""
