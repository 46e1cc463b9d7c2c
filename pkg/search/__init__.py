# Search package initialization
