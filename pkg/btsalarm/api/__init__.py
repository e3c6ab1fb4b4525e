"""HTTP status API: request/response models and routes"""
