from rest_framework import serializers

from training.models import AggregationRule, OptimizerKind


class TrainConfigSerializer(serializers.Serializer):
    max_epochs = serializers.IntegerField(min_value=1, required=False)
    patience = serializers.IntegerField(min_value=1, required=False)
    batch_size = serializers.IntegerField(min_value=1, required=False)
    learning_rate = serializers.FloatField(required=False)
    optimizer = serializers.ChoiceField(choices=OptimizerKind.choices, required=False)
    seed = serializers.IntegerField(required=False)
    shuffle_seed = serializers.IntegerField(required=False, allow_null=True)
    gradient_clip_norm = serializers.FloatField(required=False)
    aggregation = serializers.ChoiceField(choices=AggregationRule.choices, required=False)
    class_balanced = serializers.BooleanField(required=False)

    def validate_learning_rate(self, value):
        if value <= 0:
            raise serializers.ValidationError('learning_rate must be positive')
        return value

    def validate_gradient_clip_norm(self, value):
        if value <= 0:
            raise serializers.ValidationError('gradient_clip_norm must be positive')
        return value

    def validate(self, attrs):
        max_epochs, patience = attrs.get('max_epochs'), attrs.get('patience')
        if max_epochs is not None and patience is not None and patience >= max_epochs:
            raise serializers.ValidationError({'patience': 'patience must be smaller than max_epochs'})
        return attrs
