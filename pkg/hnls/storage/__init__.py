# Import field store functions
from .field_store import load_field, save_field
